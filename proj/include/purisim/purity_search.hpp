#pragma once

// Maximal attainable purification pi_M: dense time scans with golden-section
// refinement for fixed parameters, resonance sweeps over omega_p, the 2D
// (g, omega_p) grid, and the optimal-probe search over the Bloch sphere.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "purisim/closed_dynamics.hpp"
#include "purisim/model.hpp"
#include "purisim/open_dynamics.hpp"
#include "purisim/parallel.hpp"
#include "purisim/qubit_algebra.hpp"

namespace purisim {

struct SearchSpec {
  double fixed_horizon = 0.0;  // > 0: use as-is; otherwise automatic
  int slow_periods = 5;
  int samples_per_fast_period = 20;
  bool refine = true;
};

inline void validate_spec(const SearchSpec& s) {
  if (s.slow_periods < 1 || s.samples_per_fast_period < 1)
    throw std::invalid_argument("SearchSpec: counts must be >= 1");
  if (s.fixed_horizon < 0.0 || !std::isfinite(s.fixed_horizon))
    throw std::invalid_argument("SearchSpec: bad fixed horizon");
}

struct PeakResult {
  double pi_max = 0.0;
  double t_at_max = 0.0;
  double horizon = 0.0;
};

struct TimePlan {
  double horizon;
  double sample_step;
  double fast_period;
};

namespace detail {

/// Best point of f on [lo, hi] by golden-section, tracking the best of all
/// evaluations so a non-unimodal bracket still returns a sampled maximum.
template <typename F>
inline std::pair<double, double> golden_section_max(F&& f, double lo,
                                                    double hi,
                                                    int iters = 60) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  double best_t = fc >= fd ? c : d;
  double best_v = std::max(fc, fd);
  for (int k = 0; k < iters; ++k) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
    const double t = fc >= fd ? c : d;
    const double v = std::max(fc, fd);
    if (v > best_v || (v == best_v && t < best_t)) {
      best_v = v;
      best_t = t;
    }
  }
  return {best_t, best_v};
}

inline TimePlan time_plan(double fast_rate, double slow_rate,
                          const SearchSpec& spec, double damping_cap) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  TimePlan plan;
  plan.fast_period = two_pi / fast_rate;
  plan.horizon = spec.fixed_horizon > 0.0
                     ? spec.fixed_horizon
                     : spec.slow_periods * two_pi / slow_rate;
  if (damping_cap > 0.0 && spec.fixed_horizon == 0.0)
    plan.horizon = std::min(plan.horizon, damping_cap);
  plan.sample_step = plan.fast_period / spec.samples_per_fast_period;
  return plan;
}

/// Scan f over [0, horizon] on a uniform grid, then refine around the best
/// sample inside a +-1 fast-period bracket.  Ties keep the earliest time.
template <typename F>
inline PeakResult scan_and_refine(F&& f, const TimePlan& plan, bool refine) {
  const double n_real = std::ceil(plan.horizon / plan.sample_step);
  const auto n = static_cast<long>(std::max(1.0, n_real));
  const double step = plan.horizon / static_cast<double>(n);
  PeakResult best;
  best.horizon = plan.horizon;
  best.pi_max = f(0.0);
  best.t_at_max = 0.0;
  for (long i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) * step;
    const double v = f(t);
    if (v > best.pi_max) {
      best.pi_max = v;
      best.t_at_max = t;
    }
  }
  if (refine) {
    const double lo = std::max(0.0, best.t_at_max - plan.fast_period);
    const double hi = std::min(plan.horizon, best.t_at_max + plan.fast_period);
    const auto [tg, vg] = golden_section_max(f, lo, hi);
    if (vg > best.pi_max || (vg == best.pi_max && tg < best.t_at_max)) {
      best.pi_max = vg;
      best.t_at_max = tg;
    }
  }
  return best;
}

inline double open_horizon_cap(const ModelParams& p) {
  const double rate = p.gamma_s + p.gamma_p;
  return rate > 0.0 ? 5.0 / rate : 0.0;
}

}  // namespace detail

/// The horizon/sampling plan the searches would use for these parameters.
inline TimePlan time_plan_for(const ModelParams& p, const SearchSpec& spec) {
  validate_params(p);
  validate_spec(spec);
  const HamiltonianSpectrum hs = HamiltonianSpectrum::of(total_hamiltonian(p));
  const bool open = p.gamma_s + p.gamma_p > 0.0;
  return detail::time_plan(std::max(hs.fast_rate(), 1e-12), hs.slow_rate(),
                           spec, open ? detail::open_horizon_cap(p) : 0.0);
}

/// Maximal |s(t)| over the horizon for the closed system starting from the
/// maximally mixed system state.  The main (z-axis) model uses the analytic
/// s_z(t); general axes go through the eigendecomposed propagator.
inline PeakResult pi_max_closed(const ModelParams& p, const SearchSpec& spec) {
  validate_params(p);
  validate_spec(spec);
  if (has_default_axes(p)) {
    if (p.g == 0.0) {
      PeakResult r;
      r.horizon = spec.fixed_horizon;
      return r;  // no interaction: s_z identically zero
    }
    const DerivedFrequencies f = derived_frequencies(p);
    const double scale = std::max(1.0, f.alpha);
    double slow = 0.0;
    for (const double gap :
         {std::abs(f.alpha - f.beta), 2.0 * f.beta, f.alpha + f.beta,
          2.0 * f.alpha})
      if (gap > 1e-6 * scale && (slow == 0.0 || gap < slow)) slow = gap;
    if (slow == 0.0) slow = std::max(1.0, 2.0 * f.alpha);
    const double fast = std::max(2.0 * f.alpha, 1e-6 * scale);
    const auto plan = detail::time_plan(fast, slow, spec, 0.0);
    auto f_of_t = [&](double t) { return std::abs(s_z_closed(p, t)); };
    return detail::scan_and_refine(f_of_t, plan, spec.refine);
  }
  const HamiltonianSpectrum hs = HamiltonianSpectrum::of(total_hamiltonian(p));
  const auto plan =
      detail::time_plan(std::max(hs.fast_rate(), 1e-12), hs.slow_rate(), spec,
                        0.0);
  const Matrix4 rho0 = initial_state(p);
  auto f_of_t = [&](double t) {
    const Matrix4 u = hs.unitary(t);
    return system_bloch(u * rho0 * u.adjoint()).norm();
  };
  return detail::scan_and_refine(f_of_t, plan, spec.refine);
}

/// Maximal pi(t) along the dissipative trajectory from (I/2) x rho_P.
/// Samples every integrator step; the automatic horizon covers the slow
/// envelope and is capped at 5/(gamma_s+gamma_p).  Refinement re-integrates
/// from the nearest stored snapshot inside a +-1 fast-period bracket.
inline PeakResult pi_max_open(const ModelParams& p, const SearchSpec& spec,
                              double dt_max =
                                  std::numeric_limits<double>::infinity()) {
  validate_params(p);
  validate_spec(spec);
  if (p.gamma_s + p.gamma_p == 0.0) return pi_max_closed(p, spec);

  const LindbladGenerator gen = make_generator(p);
  const HamiltonianSpectrum hs = HamiltonianSpectrum::of(gen.hamiltonian);
  const auto plan =
      detail::time_plan(std::max(hs.fast_rate(), 1e-12), hs.slow_rate(), spec,
                        detail::open_horizon_cap(p));

  const double dt = detail::lindblad_step(gen, dt_max);
  const long snap_stride =
      std::max(1L, static_cast<long>(std::floor(plan.fast_period / dt)));

  PeakResult best;
  best.horizon = plan.horizon;
  std::vector<std::pair<double, Matrix4>> snaps;
  long index = 0;
  integrate_lindblad(gen, initial_state(p), plan.horizon, dt_max,
                     [&](double t, const Matrix4& rho) {
                       if (index % snap_stride == 0) snaps.emplace_back(t, rho);
                       ++index;
                       const double v = system_bloch(rho).norm();
                       if (v > best.pi_max) {
                         best.pi_max = v;
                         best.t_at_max = t;
                       }
                     });

  if (spec.refine && !snaps.empty()) {
    const double lo = std::max(0.0, best.t_at_max - plan.fast_period);
    const double hi = std::min(plan.horizon, best.t_at_max + plan.fast_period);
    auto f_of_t = [&](double t) {
      auto it = std::upper_bound(
          snaps.begin(), snaps.end(), t,
          [](double value, const auto& s) { return value < s.first; });
      const auto& base = it == snaps.begin() ? snaps.front() : *(it - 1);
      Matrix4 rho = base.second;
      const double span = t - base.first;
      if (span > 0.0) {
        const auto n = static_cast<long>(std::max(1.0, std::ceil(span / dt)));
        const double h = span / static_cast<double>(n);
        for (long i = 0; i < n; ++i) detail::rk4_step(gen, rho, h);
      }
      return system_bloch(rho).norm();
    };
    const auto [tg, vg] = detail::golden_section_max(f_of_t, lo, hi);
    if (vg > best.pi_max || (vg == best.pi_max && tg < best.t_at_max)) {
      best.pi_max = vg;
      best.t_at_max = tg;
    }
  }
  return best;
}

struct SweepPoint {
  double omega_p = 0.0;
  double g = 0.0;
  double pi_max = std::numeric_limits<double>::quiet_NaN();
  double t_at_max = std::numeric_limits<double>::quiet_NaN();
  double horizon = std::numeric_limits<double>::quiet_NaN();
  bool effective = false;
  std::string error;  // empty on success
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// pi_M across an ascending omega_p grid; open or closed per the gamma
/// values.  Per-point failures are recorded and the sweep continues.
/// Points are independent; evaluation may be concurrent but the result is
/// merged by grid index and identical to sequential evaluation.
inline SweepResult sweep_omega_p(const ModelParams& base,
                                 const std::vector<double>& omega_p_grid,
                                 const SearchSpec& spec) {
  if (omega_p_grid.empty())
    throw std::invalid_argument("sweep_omega_p: empty grid");
  if (!std::is_sorted(omega_p_grid.begin(), omega_p_grid.end()))
    throw std::invalid_argument("sweep_omega_p: grid must be ascending");
  validate_params(base);
  validate_spec(spec);

  SweepResult result;
  result.points.resize(omega_p_grid.size());
  parallel_for_index(omega_p_grid.size(), [&](std::size_t i) {
    ModelParams p = base;
    p.omega_p = omega_p_grid[i];
    SweepPoint& pt = result.points[i];
    pt.omega_p = p.omega_p;
    pt.g = p.g;
    try {
      const PeakResult r = p.gamma_s + p.gamma_p > 0.0
                               ? pi_max_open(p, spec)
                               : pi_max_closed(p, spec);
      pt.pi_max = r.pi_max;
      pt.t_at_max = r.t_at_max;
      pt.horizon = r.horizon;
      pt.effective = time_scales(p).effective;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  });
  return result;
}

struct GridPoint {
  double g = 0.0;
  double omega_p = 0.0;
  double pi_max = std::numeric_limits<double>::quiet_NaN();
  double t_at_max = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct GridResult {
  std::vector<double> g_values;
  std::vector<double> omega_p_values;
  std::vector<GridPoint> points;  // g-major: index = ig * n_omega + iw
  std::size_t global_max_index = 0;
  std::vector<std::size_t> local_max_indices;
};

/// Full (g, omega_p) table of pi_M plus the global maximizer and every
/// strict local maximum (8-neighborhood) on the grid.
inline GridResult grid_g_omega_p(const ModelParams& base,
                                 const std::vector<double>& g_grid,
                                 const std::vector<double>& omega_p_grid,
                                 const SearchSpec& spec) {
  if (g_grid.empty() || omega_p_grid.empty())
    throw std::invalid_argument("grid_g_omega_p: empty grid");
  validate_params(base);
  validate_spec(spec);

  GridResult result;
  result.g_values = g_grid;
  result.omega_p_values = omega_p_grid;
  const std::size_t ng = g_grid.size(), nw = omega_p_grid.size();
  result.points.resize(ng * nw);
  parallel_for_index(ng * nw, [&](std::size_t idx) {
    ModelParams p = base;
    p.g = g_grid[idx / nw];
    p.omega_p = omega_p_grid[idx % nw];
    GridPoint& pt = result.points[idx];
    pt.g = p.g;
    pt.omega_p = p.omega_p;
    try {
      const PeakResult r = p.gamma_s + p.gamma_p > 0.0
                               ? pi_max_open(p, spec)
                               : pi_max_closed(p, spec);
      pt.pi_max = r.pi_max;
      pt.t_at_max = r.t_at_max;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  });

  double best = -1.0;
  for (std::size_t idx = 0; idx < result.points.size(); ++idx) {
    const double v = result.points[idx].pi_max;
    if (std::isfinite(v) && v > best) {
      best = v;
      result.global_max_index = idx;
    }
  }
  for (std::size_t idx = 0; idx < result.points.size(); ++idx) {
    const double v = result.points[idx].pi_max;
    if (!std::isfinite(v)) continue;
    const long ig = static_cast<long>(idx / nw);
    const long iw = static_cast<long>(idx % nw);
    bool is_max = true;
    for (long dg = -1; dg <= 1 && is_max; ++dg)
      for (long dw = -1; dw <= 1 && is_max; ++dw) {
        if (dg == 0 && dw == 0) continue;
        const long jg = ig + dg, jw = iw + dw;
        if (jg < 0 || jw < 0 || jg >= static_cast<long>(ng) ||
            jw >= static_cast<long>(nw))
          continue;
        const double u = result.points[jg * nw + jw].pi_max;
        if (std::isfinite(u) && u >= v) is_max = false;
      }
    if (is_max) result.local_max_indices.push_back(idx);
  }
  return result;
}

struct ProbeSearchResult {
  Bloch best_probe{0, 0, 1};
  double pi_max = 0.0;
  double t_at_max = 0.0;
};

/// Scans unit probe Bloch vectors on an inclusive latitude/longitude grid
/// and maximizes pi_M.  For the maximally mixed initial system state the
/// system Bloch vector is linear in the probe vector, so one pass over
/// time (closed) or three basis trajectories (open) evaluate every probe.
inline ProbeSearchResult optimal_probe_search(const ModelParams& p,
                                              const SearchSpec& spec,
                                              int n_theta, int n_phi) {
  if (n_theta < 8 || n_phi < 8)
    throw std::invalid_argument(
        "optimal_probe_search: grid resolutions must be >= 8");
  validate_params(p);
  validate_spec(spec);
  constexpr double pi_const = 3.14159265358979323846;

  std::vector<Bloch> probes;
  probes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    const double th = pi_const * static_cast<double>(i) / (n_theta - 1);
    for (int j = 0; j < n_phi; ++j) {
      const double ph = 2.0 * pi_const * static_cast<double>(j) / n_phi;
      probes.emplace_back(std::sin(th) * std::cos(ph),
                          std::sin(th) * std::sin(ph), std::cos(th));
    }
  }

  Matrix4 basis_rho[3];
  for (int i = 0; i < 3; ++i)
    basis_rho[i] =
        tensor(0.5 * identity2(), 0.5 * (identity2() + pauli(i)));

  // Columns of K(t): system Bloch vector for the probe basis vectors.
  std::vector<Eigen::Matrix3d> kmats;
  std::vector<double> ktimes;
  const bool open = p.gamma_s + p.gamma_p > 0.0;
  const HamiltonianSpectrum hs = HamiltonianSpectrum::of(total_hamiltonian(p));
  const auto plan = detail::time_plan(std::max(hs.fast_rate(), 1e-12),
                                      hs.slow_rate(), spec,
                                      open ? detail::open_horizon_cap(p) : 0.0);
  if (!open) {
    const double n_real = std::ceil(plan.horizon / plan.sample_step);
    const auto n = static_cast<long>(std::max(1.0, n_real));
    const double step = plan.horizon / static_cast<double>(n);
    for (long i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) * step;
      const Matrix4 u = hs.unitary(t);
      Eigen::Matrix3d k;
      for (int col = 0; col < 3; ++col)
        k.col(col) = system_bloch(u * basis_rho[col] * u.adjoint());
      ktimes.push_back(t);
      kmats.push_back(k);
    }
  } else {
    const LindbladGenerator gen = make_generator(p);
    for (int col = 0; col < 3; ++col) {
      std::size_t at = 0;
      integrate_lindblad(gen, basis_rho[col], plan.horizon,
                         std::numeric_limits<double>::infinity(),
                         [&](double t, const Matrix4& rho) {
                           if (col == 0) {
                             ktimes.push_back(t);
                             kmats.emplace_back();
                           }
                           kmats[at].col(col) = system_bloch(rho);
                           ++at;
                         });
    }
  }

  std::size_t best_probe = 0;
  double best_v = -1.0, best_t = 0.0;
  for (std::size_t pi_idx = 0; pi_idx < probes.size(); ++pi_idx) {
    double v = -1.0, tv = 0.0;
    for (std::size_t k = 0; k < kmats.size(); ++k) {
      const double val = (kmats[k] * probes[pi_idx]).norm();
      if (val > v) {
        v = val;
        tv = ktimes[k];
      }
    }
    if (v > best_v) {
      best_v = v;
      best_t = tv;
      best_probe = pi_idx;
    }
  }

  ProbeSearchResult result;
  result.best_probe = probes[best_probe];
  result.pi_max = best_v;
  result.t_at_max = best_t;
  if (spec.refine) {
    if (!open) {
      auto f_of_t = [&](double t) {
        const Matrix4 u = hs.unitary(t);
        Eigen::Matrix3d k;
        for (int col = 0; col < 3; ++col)
          k.col(col) = system_bloch(u * basis_rho[col] * u.adjoint());
        return (k * result.best_probe).norm();
      };
      const double lo = std::max(0.0, best_t - plan.fast_period);
      const double hi = std::min(plan.horizon, best_t + plan.fast_period);
      const auto [tg, vg] = detail::golden_section_max(f_of_t, lo, hi);
      if (vg > result.pi_max) {
        result.pi_max = vg;
        result.t_at_max = tg;
      }
    } else {
      ModelParams refined = p;
      refined.probe = result.best_probe;
      const PeakResult r = pi_max_open(refined, spec);
      if (r.pi_max >= result.pi_max) {
        result.pi_max = r.pi_max;
        result.t_at_max = r.t_at_max;
      }
    }
  }
  return result;
}

}  // namespace purisim

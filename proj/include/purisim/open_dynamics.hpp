#pragma once

// Open-system evolution of the composite system: isotropic-decoherence
// dissipator, fixed-step RK4 integration of the master equation
// d rho/dt = -i [H, rho] + D[rho], and the three-time-scale diagnostics.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "purisim/closed_dynamics.hpp"
#include "purisim/model.hpp"
#include "purisim/qubit_algebra.hpp"

namespace purisim {

struct LindbladGenerator {
  Matrix4 hamiltonian;
  double gamma_s = 0.0;
  double gamma_p = 0.0;

  static LindbladGenerator of(const Matrix4& h, double gamma_s,
                              double gamma_p) {
    if (!h.allFinite() || hermiticity_error(h) > 1e-12)
      throw std::invalid_argument("LindbladGenerator: non-Hermitian H");
    if (gamma_s < 0.0 || gamma_p < 0.0)
      throw std::invalid_argument("LindbladGenerator: negative rate");
    return {h, gamma_s, gamma_p};
  }
};

inline LindbladGenerator make_generator(const ModelParams& p) {
  validate_params(p);
  return LindbladGenerator::of(total_hamiltonian(p), p.gamma_s, p.gamma_p);
}

// Isotropic decoherence on both qubits, trace-preserving normalization:
//   gamma_s (sum_i sigma_i^S rho sigma_i^S - 3 rho)
// + gamma_p (sum_i sigma_i^P rho sigma_i^P - 3 rho).
// Uses sum_i sigma_i A sigma_i = 2 tr(A) I - A applied per factor, which
// turns each channel into a partial-trace expression.
inline Matrix4 dissipator_raw(const Matrix4& rho, double gamma_s,
                              double gamma_p) {
  Matrix4 out = Matrix4::Zero();
  if (gamma_s != 0.0) {
    const Matrix2 tr_s = partial_trace_s_raw(rho);
    out += gamma_s * (2.0 * tensor(identity2(), tr_s) - 4.0 * rho);
  }
  if (gamma_p != 0.0) {
    const Matrix2 tr_p = partial_trace_p_raw(rho);
    out += gamma_p * (2.0 * tensor(tr_p, identity2()) - 4.0 * rho);
  }
  return out;
}

inline Matrix4 dissipator(const Matrix4& rho, double gamma_s, double gamma_p) {
  if (gamma_s < 0.0 || gamma_p < 0.0)
    throw std::invalid_argument("dissipator: negative rate");
  require_density_matrix(rho, "dissipator");
  return dissipator_raw(rho, gamma_s, gamma_p);
}

inline Matrix4 lindblad_rhs(const LindbladGenerator& gen, const Matrix4& rho) {
  const Matrix4 comm = gen.hamiltonian * rho - rho * gen.hamiltonian;
  return complexd(0.0, -1.0) * comm +
         dissipator_raw(rho, gen.gamma_s, gen.gamma_p);
}

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double last_good_time)
      : std::runtime_error(what), last_good_time_(last_good_time) {}
  double last_good_time() const { return last_good_time_; }

 private:
  double last_good_time_;
};

namespace detail {

inline constexpr std::int64_t kMaxSteps = 200'000'000;

/// Fixed step honoring the user cap, the fastest coherent oscillation
/// (1/20 of the spectral spread time) and the stiffest dissipative rate.
inline double lindblad_step(const LindbladGenerator& gen, double dt_max) {
  double dt = dt_max;
  const double spread = HamiltonianSpectrum::of(gen.hamiltonian).fast_rate();
  if (spread > 0.0) dt = std::min(dt, 1.0 / (20.0 * spread));
  const double rate = gen.gamma_s + gen.gamma_p;
  if (rate > 0.0) dt = std::min(dt, 1.0 / (80.0 * rate));
  return dt;
}

/// One RK4 step of the master equation, re-Hermitized; returns the
/// pre-hermitization drift so callers can enforce their tolerance.
inline double rk4_step(const LindbladGenerator& gen, Matrix4& rho, double dt) {
  const Matrix4 k1 = lindblad_rhs(gen, rho);
  const Matrix4 k2 = lindblad_rhs(gen, Matrix4(rho + (0.5 * dt) * k1));
  const Matrix4 k3 = lindblad_rhs(gen, Matrix4(rho + (0.5 * dt) * k2));
  const Matrix4 k4 = lindblad_rhs(gen, Matrix4(rho + dt * k3));
  rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const double drift = hermiticity_error(rho);
  rho = 0.5 * (rho + rho.adjoint().eval());
  return drift;
}

}  // namespace detail

/// Integrates the master equation from rho_t0 over [0, t_end] with a fixed
/// RK4 step bounded by dt_max and by the fast coherent/dissipative scales.
/// The observer is called as obs(t, rho) at t = 0 and after every step.
/// Each step re-Hermitizes the state; the trace is never renormalized, its
/// drift (and positivity, sampled periodically) is checked against the
/// integration tolerances instead.
template <typename Observer>
inline void integrate_lindblad(const LindbladGenerator& gen,
                               const Matrix4& rho_t0, double t_end,
                               double dt_max, Observer&& obs) {
  if (!(t_end > 0.0))
    throw std::invalid_argument("integrate_lindblad: t_end must be > 0");
  if (!(dt_max > 0.0))
    throw std::invalid_argument("integrate_lindblad: dt_max must be > 0");
  if (gen.gamma_s < 0.0 || gen.gamma_p < 0.0)
    throw std::invalid_argument("integrate_lindblad: negative rate");
  require_density_matrix(rho_t0, "integrate_lindblad");

  const double dt_raw = detail::lindblad_step(gen, dt_max);
  const double n_real = std::ceil(t_end / dt_raw);
  if (!(n_real < static_cast<double>(detail::kMaxSteps)))
    throw IntegrationError("integrate_lindblad: step size underflow", 0.0);
  const std::int64_t n = static_cast<std::int64_t>(n_real);
  const double dt = t_end / static_cast<double>(n);

  Matrix4 rho = rho_t0;
  obs(0.0, rho);
  double t_good = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double herm_drift = detail::rk4_step(gen, rho, dt);
    const double t = static_cast<double>(i + 1) * dt;
    if (!rho.allFinite() || herm_drift > 1e-9)
      throw IntegrationError("integrate_lindblad: Hermiticity tolerance failure",
                             t_good);
    if (std::abs(rho.trace() - complexd(1, 0)) > 1e-9)
      throw IntegrationError("integrate_lindblad: trace tolerance failure",
                             t_good);
    if ((i % 64 == 63 || i == n - 1) && min_eigenvalue(rho) < -1e-8)
      throw IntegrationError("integrate_lindblad: positivity tolerance failure",
                             t_good);
    t_good = t;
    obs(t, rho);
  }
}

/// Trajectory-returning overload.
inline std::vector<std::pair<double, Matrix4>> integrate_lindblad(
    const LindbladGenerator& gen, const Matrix4& rho_t0, double t_end,
    double dt_max) {
  std::vector<std::pair<double, Matrix4>> out;
  integrate_lindblad(gen, rho_t0, t_end, dt_max,
                     [&](double t, const Matrix4& rho) {
                       out.emplace_back(t, rho);
                     });
  return out;
}

/// pi(t) of the dissipative evolution from (I/2) x rho_P(probe).
inline PurityTrace trace_open(const ModelParams& p, double t_end,
                              double dt_max) {
  const LindbladGenerator gen = make_generator(p);
  PurityTrace tr;
  integrate_lindblad(gen, initial_state(p), t_end, dt_max,
                     [&](double t, const Matrix4& rho) {
                       trace_push(tr, t, system_bloch(rho));
                     });
  return tr;
}

struct TimeScales {
  double t_fast;   // 1/(alpha + beta)
  double t_slow;   // 1/|alpha - beta|, +inf when alpha = beta
  double t_damp;   // 1/gamma_s, +inf when gamma_s = 0
  bool effective;  // damping negligible over the slow scale
};

/// Three characteristic times of the open dynamics; purification is
/// classified as effective when t_damp exceeds 10 * t_slow (undamped
/// systems are always effective).
inline TimeScales time_scales(const ModelParams& p) {
  const DerivedFrequencies f = derived_frequencies(p);
  constexpr double inf = std::numeric_limits<double>::infinity();
  TimeScales ts;
  const double sum = f.alpha + f.beta;
  const double gap = std::abs(f.alpha - f.beta);
  ts.t_fast = sum > 0.0 ? 1.0 / sum : inf;
  ts.t_slow = gap > 0.0 ? 1.0 / gap : inf;
  ts.t_damp = p.gamma_s > 0.0 ? 1.0 / p.gamma_s : inf;
  ts.effective = p.gamma_s == 0.0 ? true : ts.t_damp > 10.0 * ts.t_slow;
  return ts;
}

}  // namespace purisim

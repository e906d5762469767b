#pragma once

// Exact closed-system evolution of the composite system: the analytic
// six-term propagator of the main model, a Hermitian-eigendecomposition
// matrix exponential for arbitrary 4x4 Hamiltonians, the analytic s_z(t)
// for the maximally mixed initial system state, and the closed-form purity
// envelope and weak-coupling resonance values.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "purisim/model.hpp"
#include "purisim/qubit_algebra.hpp"

namespace purisim {

/// sin(x t)/x with the removable singularity at x = 0.
inline double sinc_scaled(double x, double t) {
  return x == 0.0 ? t : std::sin(x * t) / x;
}

/// Eigendecomposition of a Hermitian 4x4 Hamiltonian, reusable across many
/// evolution times: U(t) = V exp(-i lambda t) V^dagger.
struct HamiltonianSpectrum {
  Eigen::Vector4d eigenvalues;
  Matrix4 eigenvectors;

  static HamiltonianSpectrum of(const Matrix4& h) {
    if (!h.allFinite() || hermiticity_error(h) > 1e-10)
      throw std::invalid_argument("HamiltonianSpectrum: non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (h + h.adjoint()));
    return {es.eigenvalues(), es.eigenvectors()};
  }

  Matrix4 unitary(double t) const {
    Eigen::Vector4cd phases;
    for (int k = 0; k < 4; ++k)
      phases(k) = std::exp(complexd(0.0, -eigenvalues(k) * t));
    return eigenvectors * phases.asDiagonal() * eigenvectors.adjoint();
  }

  /// Largest pairwise eigenvalue gap: the fastest coherent angular frequency.
  double fast_rate() const {
    return eigenvalues.maxCoeff() - eigenvalues.minCoeff();
  }

  /// Smallest nonzero pairwise gap: the slowest envelope angular frequency.
  /// Gaps below 1e-6 of the spectral scale count as degenerate.
  double slow_rate() const {
    const double scale =
        std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
    double best = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        const double gap = std::abs(eigenvalues(i) - eigenvalues(j));
        if (gap > 1e-6 * scale && (best == 0.0 || gap < best)) best = gap;
      }
    return best > 0.0 ? best : std::max(1.0, fast_rate());
  }
};

/// exp(-i H t) for Hermitian H.
inline Matrix4 hermitian_exp(const Matrix4& h, double t) {
  return HamiltonianSpectrum::of(h).unitary(t);
}

/// Analytic propagator of the main model: the six-term closed form built
/// from cos(alpha t), cos(beta t) and the four sin terms, with
/// alpha = sqrt((omega_s+omega_p)^2 + g^2), beta = sqrt((omega_s-omega_p)^2 + g^2).
inline Matrix4 propagator(const ModelParams& p, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("propagator: t not finite");
  const DerivedFrequencies f = derived_frequencies(p);
  const complexd mi(0.0, -1.0);

  const Matrix4 ii = identity4();
  const Matrix4 zz = tensor(pauli(Axis::z), pauli(Axis::z));
  const Matrix4 zi = tensor(pauli(Axis::z), identity2());
  const Matrix4 iz = tensor(identity2(), pauli(Axis::z));
  const Matrix4 xx = tensor(pauli(Axis::x), pauli(Axis::x));
  const Matrix4 yy = tensor(pauli(Axis::y), pauli(Axis::y));

  Matrix4 u = 0.5 * std::cos(f.alpha * t) * (ii + zz);
  u += 0.5 * std::cos(f.beta * t) * (ii - zz);
  u += mi * 0.5 * f.omega_bar * sinc_scaled(f.alpha, t) * (zi + iz);
  u += mi * 0.5 * f.delta_omega * sinc_scaled(f.beta, t) * (zi - iz);
  u += mi * 0.5 * p.g * sinc_scaled(f.alpha, t) * (xx - yy);
  u += mi * 0.5 * p.g * sinc_scaled(f.beta, t) * (xx + yy);
  return u;
}

/// U rho U^dagger with the analytic propagator.
inline Matrix4 evolve_closed(const ModelParams& p, const Matrix4& rho_t0,
                             double t) {
  require_density_matrix(rho_t0, "evolve_closed");
  const Matrix4 u = propagator(p, t);
  return u * rho_t0 * u.adjoint();
}

/// exp(-i H t) rho exp(+i H t) for an arbitrary Hermitian H.
inline Matrix4 evolve_general_closed(const Matrix4& h_total,
                                     const Matrix4& rho_t0, double t) {
  require_density_matrix(rho_t0, "evolve_general_closed");
  const Matrix4 u = hermitian_exp(h_total, t);
  return u * rho_t0 * u.adjoint();
}

/// Analytic z Bloch component for the maximally mixed initial system state:
/// s_z(t) = p_z g^2 (sin^2(beta t)/beta^2 - sin^2(alpha t)/alpha^2).
/// The x and y components vanish identically in this configuration.
inline double s_z_closed(const ModelParams& p, double t) {
  const DerivedFrequencies f = derived_frequencies(p);
  const double sb = sinc_scaled(f.beta, t);
  const double sa = sinc_scaled(f.alpha, t);
  return p.probe.z() * p.g * p.g * (sb * sb - sa * sa);
}

/// Supremum of |s_z(t)|: |p_z| g^2 / beta^2.  An upper envelope, attainable
/// arbitrarily closely when alpha/beta is irrational; the attained maximum
/// over a finite horizon is what the search module reports.
inline double pi_sup_closed(const ModelParams& p) {
  if (p.g == 0.0) return 0.0;
  const DerivedFrequencies f = derived_frequencies(p);
  return std::abs(p.probe.z()) * p.g * p.g / (f.beta * f.beta);
}

/// Weak-coupling Cauchy-Lorentz resonance value
/// |p_z| g^2 / ((omega_s - omega_p)^2 + g^2); intended for g << omega_s,p.
inline double pi_weak_coupling(const ModelParams& p) {
  if (p.g == 0.0) return 0.0;
  const double dw = p.omega_s - p.omega_p;
  return std::abs(p.probe.z()) * p.g * p.g / (dw * dw + p.g * p.g);
}

/// Sampled purity history with its running maximum.
struct PurityTrace {
  std::vector<double> times;
  std::vector<double> purities;
  std::vector<Bloch> bloch;  // system Bloch vector per sample
  double t_max = 0.0;
  double pi_max = 0.0;
};

inline void trace_push(PurityTrace& tr, double t, const Bloch& s) {
  const double pi = s.norm();
  tr.times.push_back(t);
  tr.purities.push_back(pi);
  tr.bloch.push_back(s);
  if (pi > tr.pi_max) {
    tr.pi_max = pi;
    tr.t_max = t;
  }
}

/// pi(t) of the closed evolution from (I/2) x rho_P(probe), sampled on a
/// uniform grid of `samples` intervals over [0, t_end].
inline PurityTrace trace_closed(const ModelParams& p, double t_end,
                                int samples) {
  if (!(t_end > 0.0) || samples < 1)
    throw std::invalid_argument("trace_closed: need t_end > 0, samples >= 1");
  validate_params(p);
  PurityTrace tr;
  const HamiltonianSpectrum spec = HamiltonianSpectrum::of(total_hamiltonian(p));
  const Matrix4 rho0 = initial_state(p);
  for (int i = 0; i <= samples; ++i) {
    const double t = t_end * static_cast<double>(i) / samples;
    const Matrix4 u = spec.unitary(t);
    trace_push(tr, t, system_bloch(u * rho0 * u.adjoint()));
  }
  return tr;
}

}  // namespace purisim

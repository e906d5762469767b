#pragma once

// Model parameters for the probe-purification setup and the frequencies
// derived from them.  The main model is
//   H_T = omega_s sigma_z^S + omega_p sigma_z^P + g sigma_x^S sigma_x^P
// (hbar = 1, all quantities dimensionless); n_axis/m_axis generalize the
// free terms to omega_s (n.sigma) and omega_p (m.sigma) while the
// interaction stays g sigma_x sigma_x.

#include <cmath>
#include <stdexcept>

#include "purisim/qubit_algebra.hpp"

namespace purisim {

struct ModelParams {
  double omega_s = 1.0;
  double omega_p = 1.0;
  double g = 0.0;
  double gamma_s = 0.0;
  double gamma_p = 0.0;
  Bloch probe{0.0, 0.0, 1.0};
  Bloch n_axis{0.0, 0.0, 1.0};
  Bloch m_axis{0.0, 0.0, 1.0};
};

inline void validate_params(const ModelParams& p) {
  if (!std::isfinite(p.omega_s) || !std::isfinite(p.omega_p) ||
      !std::isfinite(p.g) || !std::isfinite(p.gamma_s) ||
      !std::isfinite(p.gamma_p))
    throw std::invalid_argument("model params must be finite");
  if (p.gamma_s < 0.0 || p.gamma_p < 0.0)
    throw std::invalid_argument("decay rates must be non-negative");
  if (p.probe.norm() > 1.0 + 1e-10)
    throw std::invalid_argument("probe Bloch vector norm exceeds 1");
  if (std::abs(p.n_axis.norm() - 1.0) > 1e-12 ||
      std::abs(p.m_axis.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("n_axis and m_axis must be unit vectors");
}

inline bool has_default_axes(const ModelParams& p) {
  return (p.n_axis - Bloch(0, 0, 1)).norm() < 1e-12 &&
         (p.m_axis - Bloch(0, 0, 1)).norm() < 1e-12;
}

struct DerivedFrequencies {
  double omega_bar;    // omega_s + omega_p
  double delta_omega;  // omega_s - omega_p
  double alpha;        // sqrt(omega_bar^2 + g^2)
  double beta;         // sqrt(delta_omega^2 + g^2)
};

inline DerivedFrequencies derived_frequencies(const ModelParams& p) {
  DerivedFrequencies f;
  f.omega_bar = p.omega_s + p.omega_p;
  f.delta_omega = p.omega_s - p.omega_p;
  f.alpha = std::hypot(f.omega_bar, p.g);
  f.beta = std::hypot(f.delta_omega, p.g);
  return f;
}

inline Matrix2 system_hamiltonian(const ModelParams& p) {
  return p.omega_s * pauli_dot(p.n_axis);
}

inline Matrix2 probe_hamiltonian(const ModelParams& p) {
  return p.omega_p * pauli_dot(p.m_axis);
}

inline Matrix4 interaction_hamiltonian(const ModelParams& p) {
  return p.g * tensor(pauli(Axis::x), pauli(Axis::x));
}

inline Matrix4 total_hamiltonian(const ModelParams& p) {
  return tensor(system_hamiltonian(p), identity2()) +
         tensor(identity2(), probe_hamiltonian(p)) + interaction_hamiltonian(p);
}

/// Initial composite state (I/2) x rho_P(probe) used by all pi_M searches.
inline Matrix4 initial_state(const ModelParams& p) {
  return tensor(0.5 * identity2(), bloch_to_rho(p.probe));
}

}  // namespace purisim

#pragma once

// Complex linear algebra for one- and two-qubit operators: Pauli matrices,
// tensor products, partial traces, density-matrix <-> Bloch-vector
// conversions and the purity functional.  Index convention throughout the
// project: the system qubit S is the slow (first) tensor factor, the probe
// qubit P the fast (second) one, so a composite index reads 2*i_S + i_P.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace purisim {

using complexd = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Bloch = Eigen::Vector3d;

inline constexpr double kHermTol = 1e-9;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kEigTol = 1e-8;

enum class Axis { x = 0, y = 1, z = 2 };

inline const Matrix2& identity2() {
  static const Matrix2 id = Matrix2::Identity();
  return id;
}

inline const Matrix4& identity4() {
  static const Matrix4 id = Matrix4::Identity();
  return id;
}

/// Standard Pauli matrix along the given axis.
inline const Matrix2& pauli(Axis axis) {
  static const Matrix2 sx = (Matrix2() << 0, 1, 1, 0).finished();
  static const Matrix2 sy =
      (Matrix2() << 0, complexd(0, -1), complexd(0, 1), 0).finished();
  static const Matrix2 sz = (Matrix2() << 1, 0, 0, -1).finished();
  switch (axis) {
    case Axis::x:
      return sx;
    case Axis::y:
      return sy;
    default:
      return sz;
  }
}

inline const Matrix2& pauli(int axis) { return pauli(static_cast<Axis>(axis)); }

/// n . sigma for a real 3-vector n.
inline Matrix2 pauli_dot(const Bloch& n) {
  return n.x() * pauli(Axis::x) + n.y() * pauli(Axis::y) +
         n.z() * pauli(Axis::z);
}

/// Kronecker product with S as the first (slow) factor.
inline Matrix4 tensor(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

template <typename Matrix>
inline double hermiticity_error(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Matrix>
inline double min_eigenvalue(const Matrix& m) {
  Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename Matrix>
inline bool is_density_matrix(const Matrix& m, double herm_tol = kHermTol,
                              double trace_tol = kTraceTol,
                              double eig_tol = kEigTol) {
  if (!m.allFinite()) return false;
  if (hermiticity_error(m) > herm_tol) return false;
  if (std::abs(m.trace() - complexd(1, 0)) > trace_tol) return false;
  return min_eigenvalue(m) >= -eig_tol;
}

template <typename Matrix>
inline void require_density_matrix(const Matrix& m, const char* where) {
  if (!is_density_matrix(m))
    throw std::invalid_argument(std::string(where) +
                                ": input is not a valid density matrix");
}

/// Tr_P of a two-qubit operator; validates that the input is a state.
inline Matrix2 partial_trace_p(const Matrix4& rho_t) {
  require_density_matrix(rho_t, "partial_trace_p");
  Matrix2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out(i, j) = rho_t(2 * i, 2 * j) + rho_t(2 * i + 1, 2 * j + 1);
  return out;
}

/// Tr_S counterpart (probe marginal).
inline Matrix2 partial_trace_s(const Matrix4& rho_t) {
  require_density_matrix(rho_t, "partial_trace_s");
  Matrix2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out(i, j) = rho_t(i, j) + rho_t(2 + i, 2 + j);
  return out;
}

// Unvalidated partial traces for integrator/search hot paths.
inline Matrix2 partial_trace_p_raw(const Matrix4& rho_t) {
  Matrix2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out(i, j) = rho_t(2 * i, 2 * j) + rho_t(2 * i + 1, 2 * j + 1);
  return out;
}

inline Matrix2 partial_trace_s_raw(const Matrix4& rho_t) {
  Matrix2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out(i, j) = rho_t(i, j) + rho_t(2 + i, 2 + j);
  return out;
}

/// Bloch vector of the system marginal, Tr(rho_T sigma_i^S x I), without
/// forming the 2x2 marginal.  No validation; meant for sampling loops.
inline Bloch system_bloch(const Matrix4& rho_t) {
  const complexd c = rho_t(0, 2) + rho_t(1, 3);
  return Bloch(2.0 * c.real(), -2.0 * c.imag(),
               (rho_t(0, 0) + rho_t(1, 1) - rho_t(2, 2) - rho_t(3, 3)).real());
}

/// Bloch vector of the probe marginal.
inline Bloch probe_bloch(const Matrix4& rho_t) {
  const complexd c = rho_t(0, 1) + rho_t(2, 3);
  return Bloch(2.0 * c.real(), -2.0 * c.imag(),
               (rho_t(0, 0) - rho_t(1, 1) + rho_t(2, 2) - rho_t(3, 3)).real());
}

/// rho = (I + s . sigma) / 2; requires |s| <= 1.
inline Matrix2 bloch_to_rho(const Bloch& s) {
  if (s.norm() > 1.0 + 1e-10)
    throw std::invalid_argument("bloch_to_rho: Bloch vector norm exceeds 1");
  return 0.5 * (identity2() + pauli_dot(s));
}

/// Components Tr(rho sigma_i); validates the input state.
inline Bloch rho_to_bloch(const Matrix2& rho) {
  require_density_matrix(rho, "rho_to_bloch");
  const complexd c = rho(0, 1);
  return Bloch(2.0 * c.real(), -2.0 * c.imag(), (rho(0, 0) - rho(1, 1)).real());
}

/// Purity of a qubit state in Bloch form; equals sqrt(2 Tr rho^2 - 1).
inline double purity(const Bloch& s) { return s.norm(); }

}  // namespace purisim

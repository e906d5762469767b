#pragma once

// Cartan (KAK) decomposition of two-qubit unitaries via the magic basis:
//   U = e^{i phase} (l1_s x l1_p) exp(i(c_x XX + c_y YY + c_z ZZ)) (l2_s x l2_p)
// with the canonical coefficients folded into the Weyl chamber
// pi/4 >= c_x >= c_y >= |c_z| (c_z >= 0 on the c_x = pi/4 boundary), plus
// the purification-capability criterion on those coefficients.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "purisim/closed_dynamics.hpp"
#include "purisim/model.hpp"
#include "purisim/qubit_algebra.hpp"

namespace purisim {

struct KakDecomposition {
  Matrix2 l1_s, l1_p;  // left local factor L1 = l1_s x l1_p
  Matrix2 l2_s, l2_p;  // right local factor L2 = l2_s x l2_p
  Eigen::Vector3d c;   // canonical coefficients, radians, Weyl-folded
  double phase = 0.0;  // global phase, radians
};

/// The entangling core exp(i(c_x XX + c_y YY + c_z ZZ)).  Diagonal in the
/// magic basis with phases (c_x-c_y+c_z, c_x+c_y-c_z, -c_x-c_y-c_z,
/// -c_x+c_y+c_z).
inline Matrix4 canonical_core(const Eigen::Vector3d& c);

inline Matrix4 kak_reconstruct(const KakDecomposition& k) {
  return std::exp(complexd(0.0, k.phase)) * tensor(k.l1_s, k.l1_p) *
         canonical_core(k.c) * tensor(k.l2_s, k.l2_p);
}

/// True iff at least two of the canonical coefficients exceed tol in
/// magnitude: the necessary condition for any purity gain.
inline bool can_purify(const Eigen::Vector3d& c, double tol = 1e-8) {
  if (!(tol > 0.0)) throw std::invalid_argument("can_purify: tol must be > 0");
  int nonzero = 0;
  for (int j = 0; j < 3; ++j)
    if (std::abs(c(j)) > tol) ++nonzero;
  return nonzero >= 2;
}

namespace detail {

inline const Matrix4& magic_basis() {
  static const Matrix4 b = [] {
    const double r = 1.0 / std::numbers::sqrt2;
    const complexd i(0.0, 1.0);
    Matrix4 m = Matrix4::Zero();
    m(0, 0) = r;
    m(0, 3) = r * i;
    m(1, 1) = r * i;
    m(1, 2) = r;
    m(2, 1) = r * i;
    m(2, 2) = -r;
    m(3, 0) = r;
    m(3, 3) = -r * i;
    return m;
  }();
  return b;
}

/// Simultaneous real-orthogonal eigenbasis of a complex symmetric unitary:
/// its real and imaginary parts are commuting real symmetric matrices, so
/// the real part is diagonalized first and the imaginary part is
/// sub-diagonalized inside each (near-)degenerate cluster.
struct SymmetricUnitaryEig {
  Eigen::Matrix4d vectors;      // real orthogonal, det +1
  Eigen::Vector4cd values;      // unit-modulus eigenvalues, phase-sorted
};

inline std::optional<SymmetricUnitaryEig> diag_symmetric_unitary(
    const Matrix4& m2, double cluster_tol) {
  Eigen::Matrix4d x = 0.5 * (m2.real() + m2.real().transpose());
  Eigen::Matrix4d y = 0.5 * (m2.imag() + m2.imag().transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> esx(x);
  Eigen::Matrix4d p = esx.eigenvectors();
  const Eigen::Vector4d xv = esx.eigenvalues();

  for (int lo = 0; lo < 4;) {
    int hi = lo + 1;
    while (hi < 4 && xv(hi) - xv(lo) < cluster_tol) ++hi;
    const int len = hi - lo;
    if (len > 1) {
      const Eigen::MatrixXd q = p.middleCols(lo, len);
      Eigen::MatrixXd yc = q.transpose() * y * q;
      yc = 0.5 * (yc + yc.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esy(yc);
      p.middleCols(lo, len) = q * esy.eigenvectors();
    }
    lo = hi;
  }

  SymmetricUnitaryEig out;
  std::array<int, 4> order{0, 1, 2, 3};
  Eigen::Vector4d xr, yr;
  for (int k = 0; k < 4; ++k) {
    xr(k) = p.col(k).dot(x * p.col(k));
    yr(k) = p.col(k).dot(y * p.col(k));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::atan2(yr(a), xr(a)) > std::atan2(yr(b), xr(b));
  });
  for (int k = 0; k < 4; ++k) {
    out.vectors.col(k) = p.col(order[k]);
    out.values(k) = complexd(xr(order[k]), yr(order[k]));
  }
  if (out.vectors.determinant() < 0.0) out.vectors.col(3) *= -1.0;

  const Matrix4 pc = out.vectors.cast<complexd>();
  const Matrix4 residual =
      pc.transpose() * m2 * pc -
      Matrix4(out.values.asDiagonal());
  if (residual.cwiseAbs().maxCoeff() > 1e-9) return std::nullopt;
  return out;
}

struct KronFactors {
  Matrix2 a, b;
  double phase;
};

/// Splits K = e^{i phase} a x b (exact for Kronecker-product unitaries)
/// through the rank-1 realignment K(2i+j, 2k+l) -> R(2i+k, 2j+l).
inline std::optional<KronFactors> kron_factor(const Matrix4& k) {
  Matrix4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          r(2 * i + a, 2 * j + b) = k(2 * i + j, 2 * a + b);
  Eigen::JacobiSVD<Matrix4> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) > 1e-8) return std::nullopt;

  const double s0 = std::sqrt(svd.singularValues()(0));
  Matrix2 a_raw, b_raw;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      a_raw(i, j) = s0 * svd.matrixU()(2 * i + j, 0);
      b_raw(i, j) = s0 * std::conj(svd.matrixV()(2 * i + j, 0));
    }
  KronFactors out;
  out.a = a_raw / std::sqrt(a_raw.determinant());
  out.b = b_raw / std::sqrt(b_raw.determinant());

  const Matrix4 t = tensor(out.a, out.b);
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(t(i, j)) > best) {
        best = std::abs(t(i, j));
        bi = i;
        bj = j;
      }
  out.phase = std::arg(k(bi, bj) / t(bi, bj));
  return out;
}

/// Weyl-chamber folding.  Every move rewrites
/// U = e^{i phase} (a1 x b1) core(c) (a2 x b2) exactly.
struct FoldState {
  Eigen::Vector3d c;
  Matrix2 a1, b1, a2, b2;
  double phase;

  // c[j] -= k*pi/2, absorbing (i sigma_j sigma_j)^k into phase and L2.
  void shift(int j, long k) {
    c(j) -= static_cast<double>(k) * std::numbers::pi / 2.0;
    phase += static_cast<double>(k) * std::numbers::pi / 2.0;
    if (k % 2 != 0) {
      a2 = pauli(j) * a2;
      b2 = pauli(j) * b2;
    }
  }

  // Swap axes j and k by conjugating the core with R x R.
  void swap_axes(int j, int k) {
    static const Matrix2 s_xy = (Matrix2() << 1, 0, 0, complexd(0, 1)).finished();
    static const Matrix2 h_xz =
        (Matrix2() << 1, 1, 1, -1).finished() / std::numbers::sqrt2;
    static const Matrix2 v_yz =
        (Matrix2() << 1, complexd(0, 1), complexd(0, 1), 1).finished() /
        std::numbers::sqrt2;
    const int pair = j + k;  // 1: xy, 2: xz, 3: yz
    const Matrix2& rot = pair == 1 ? s_xy : (pair == 2 ? h_xz : v_yz);
    a1 = a1 * rot.adjoint();
    b1 = b1 * rot.adjoint();
    a2 = rot * a2;
    b2 = rot * b2;
    std::swap(c(j), c(k));
  }

  // Flip the signs of c[j], c[k] by conjugating with sigma_l x I.
  void flip_pair(int j, int k) {
    const int l = 3 - j - k;
    a1 = a1 * pauli(l);
    a2 = pauli(l) * a2;
    c(j) = -c(j);
    c(k) = -c(k);
  }

  void normalize_quarter() {
    for (int j = 0; j < 3; ++j) {
      const long k = static_cast<long>(
          std::floor(c(j) / (std::numbers::pi / 2.0)));
      if (k != 0) shift(j, k);
    }
  }

  void sort_descending() {
    if (c(0) < c(1)) swap_axes(0, 1);
    if (c(1) < c(2)) swap_axes(1, 2);
    if (c(0) < c(1)) swap_axes(0, 1);
  }

  void sort_descending_abs() {
    auto less = [&](int a, int b) { return std::abs(c(a)) < std::abs(c(b)); };
    if (less(0, 1)) swap_axes(0, 1);
    if (less(1, 2)) swap_axes(1, 2);
    if (less(0, 1)) swap_axes(0, 1);
  }

  // (c0, ck) -> (pi/2 - c0, -ck): the Weyl reflection through the c0 wall.
  void reflect(int k) {
    shift(0, 1);
    flip_pair(0, k);
  }

  void fold() {
    constexpr double quarter = std::numbers::pi / 4.0;
    normalize_quarter();
    sort_descending();
    int over = 0;
    for (int j = 0; j < 3; ++j)
      if (c(j) > quarter) ++over;
    if (over >= 2) {
      // Complement the top two entries (a proper rotation, no sign left).
      shift(0, 1);
      flip_pair(0, 1);
      shift(1, -1);
      sort_descending();
      over = c(0) > quarter ? 1 : 0;
    }
    if (over == 1) reflect(2);
    sort_descending_abs();
    if (c(0) < 0.0) flip_pair(0, 2);
    if (c(1) < 0.0) flip_pair(1, 2);
    if (c(0) >= quarter - 1e-12 && c(2) < 0.0) {
      reflect(2);
      sort_descending_abs();
    }
    c = c.array() + 0.0;  // clear negative zeros
    phase = std::remainder(phase, 2.0 * std::numbers::pi);
  }
};

inline std::optional<KakDecomposition> kak_attempt(const Matrix4& u,
                                                   double cluster_tol) {
  const complexd det = u.determinant();
  const double phase0 = std::arg(det) / 4.0;
  const Matrix4 v =
      u * (std::exp(complexd(0.0, -phase0)) / std::pow(std::abs(det), 0.25));

  const Matrix4& b = magic_basis();
  const Matrix4 m = b.adjoint() * v * b;
  const Matrix4 m2 = m.transpose() * m;

  const auto eig = diag_symmetric_unitary(m2, cluster_tol);
  if (!eig) return std::nullopt;

  Eigen::Vector4d theta;
  for (int k = 0; k < 3; ++k) theta(k) = std::arg(eig->values(k)) / 2.0;
  theta(3) = -(theta(0) + theta(1) + theta(2));

  Eigen::Vector4cd d_inv;
  for (int k = 0; k < 4; ++k) d_inv(k) = std::exp(complexd(0.0, -theta(k)));
  const Matrix4 p = eig->vectors.cast<complexd>();
  const Matrix4 o1 = m * p * d_inv.asDiagonal();

  const Matrix4 k1 = b * o1 * b.adjoint();
  const Matrix4 k2 = b * p.transpose() * b.adjoint();
  const auto f1 = kron_factor(k1);
  const auto f2 = kron_factor(k2);
  if (!f1 || !f2) return std::nullopt;

  FoldState st;
  st.c = Eigen::Vector3d(0.5 * (theta(0) + theta(1)),
                         0.5 * (theta(1) + theta(3)),
                         0.5 * (theta(0) + theta(3)));
  st.a1 = f1->a;
  st.b1 = f1->b;
  st.a2 = f2->a;
  st.b2 = f2->b;
  st.phase = phase0 + f1->phase + f2->phase;
  st.fold();

  KakDecomposition out;
  out.l1_s = st.a1;
  out.l1_p = st.b1;
  out.l2_s = st.a2;
  out.l2_p = st.b2;
  out.c = st.c;
  out.phase = st.phase;
  return out;
}

}  // namespace detail

inline Matrix4 canonical_core(const Eigen::Vector3d& c) {
  Eigen::Vector4cd phases;
  phases(0) = std::exp(complexd(0.0, c(0) - c(1) + c(2)));
  phases(1) = std::exp(complexd(0.0, c(0) + c(1) - c(2)));
  phases(2) = std::exp(complexd(0.0, -c(0) - c(1) - c(2)));
  phases(3) = std::exp(complexd(0.0, -c(0) + c(1) + c(2)));
  const Matrix4& b = detail::magic_basis();
  return b * phases.asDiagonal() * b.adjoint();
}

inline KakDecomposition kak_decompose(const Matrix4& u) {
  if (!u.allFinite() ||
      (u.adjoint() * u - identity4()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("kak_decompose: input is not unitary");
  for (const double cluster_tol : {1e-8, 1e-4}) {
    const auto attempt = detail::kak_attempt(u, cluster_tol);
    if (!attempt) continue;
    if ((kak_reconstruct(*attempt) - u).cwiseAbs().maxCoeff() < 1e-9)
      return *attempt;
  }
  throw std::runtime_error("kak_decompose: decomposition failed");
}

struct CapabilityPoint {
  double t;
  Eigen::Vector3d c;
  bool purifying;
};

/// Cartan coefficients of the model propagator across the given times,
/// with the two-nonvanishing-coefficients capability flag.
inline std::vector<CapabilityPoint> capability_scan(
    const ModelParams& p, const std::vector<double>& times,
    double tol = 1e-8) {
  if (times.empty())
    throw std::invalid_argument("capability_scan: times must be nonempty");
  validate_params(p);
  const HamiltonianSpectrum spec =
      HamiltonianSpectrum::of(total_hamiltonian(p));
  std::vector<CapabilityPoint> out;
  out.reserve(times.size());
  for (const double t : times) {
    const KakDecomposition kak = kak_decompose(spec.unitary(t));
    out.push_back({t, kak.c, can_purify(kak.c, tol)});
  }
  return out;
}

}  // namespace purisim

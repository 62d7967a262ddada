#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "cocycle/errors.hpp"

namespace cocycle {

template <int N, typename Scalar = double>
using Mat = Eigen::Matrix<Scalar, N, N>;

template <int N, typename Scalar = double>
using Vec = Eigen::Matrix<Scalar, N, 1>;

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;
using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Vec4 = Eigen::Vector4d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Tolerance ladder, shared across the library.
namespace tol {
inline constexpr double construction = 1e-12;
inline constexpr double invariant = 1e-9;
inline constexpr double decomposition = 1e-8;
inline constexpr double ode = 1e-6;
}  // namespace tol

template <typename Derived>
[[nodiscard]] bool is_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
[[nodiscard]] double frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

// =============================================================================
// Compensated determinants
// =============================================================================
//
// Plain cofactor determinants of a strongly stretched matrix cancel
// catastrophically. The fma-based expansions below keep the determinant
// accurate up to entry magnitudes of about 1e10 (2x2) / 1e6 (3x3), which is
// what the renormalization machinery needs.

namespace detail {

struct TwoFold {
  double hi;
  double lo;
};

inline TwoFold two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline TwoFold two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline TwoFold tf_add(TwoFold x, TwoFold y) {
  TwoFold s = two_sum(x.hi, y.hi);
  const double lo = s.lo + x.lo + y.lo;
  const double hi = s.hi + lo;
  return {hi, lo - (hi - s.hi)};
}

inline TwoFold tf_neg(TwoFold x) { return {-x.hi, -x.lo}; }

inline TwoFold tf_mul_d(TwoFold x, double c) {
  TwoFold p = two_prod(x.hi, c);
  const double lo = std::fma(x.lo, c, p.lo);
  const double hi = p.hi + lo;
  return {hi, lo - (hi - p.hi)};
}

// a*d - b*c as a two-fold expansion
inline TwoFold det2_tf(double a, double b, double c, double d) {
  return tf_add(two_prod(a, d), tf_neg(two_prod(b, c)));
}

}  // namespace detail

/// Determinant of a 2x2 matrix, accurate to a few ulp of the result even
/// under heavy cancellation (Kahan's fma scheme).
[[nodiscard]] inline double det2_accurate(const Mat2& m) {
  return detail::det2_tf(m(0, 0), m(0, 1), m(1, 0), m(1, 1)).hi;
}

/// Determinant of a 3x3 matrix via compensated cofactor expansion.
[[nodiscard]] inline double det3_accurate(const Mat3& m) {
  using namespace detail;
  const TwoFold m00 = det2_tf(m(1, 1), m(1, 2), m(2, 1), m(2, 2));
  const TwoFold m01 = det2_tf(m(1, 0), m(1, 2), m(2, 0), m(2, 2));
  const TwoFold m02 = det2_tf(m(1, 0), m(1, 1), m(2, 0), m(2, 1));
  TwoFold acc = tf_mul_d(m00, m(0, 0));
  acc = tf_add(acc, tf_neg(tf_mul_d(m01, m(0, 1))));
  acc = tf_add(acc, tf_mul_d(m02, m(0, 2)));
  return acc.hi;
}

template <int N>
[[nodiscard]] double det_accurate(const Mat<N>& m) {
  if constexpr (N == 2) {
    return det2_accurate(m);
  } else {
    static_assert(N == 3, "only dimensions 2 and 3 are supported");
    return det3_accurate(m);
  }
}

/// Largest entry magnitude up to which the determinant of a *stored* matrix
/// is numerically determined near 1e-9. The limit is set by information, not
/// by the algorithm: rounding the entries of m perturbs det(m) by roughly
/// eps * ||adj(m)|| * ||m||, so a strongly stretched unit-determinant product
/// genuinely loses its determinant once the norm is large.
template <int N>
[[nodiscard]] constexpr double det_trust_limit() {
  return N == 2 ? 3e3 : 2e2;
}

/// True when the matrix is small enough for its determinant to be
/// numerically meaningful at the invariant tolerance.
template <int N>
[[nodiscard]] bool det_measurable(const Mat<N>& m) {
  return m.template lpNorm<Eigen::Infinity>() <= det_trust_limit<N>();
}

// =============================================================================
// Special linear group helpers
// =============================================================================

template <int N>
[[nodiscard]] bool is_special_linear(const Mat<N>& m, double tolerance = tol::invariant) {
  return is_finite(m) && std::abs(det_accurate<N>(m) - 1.0) <= tolerance;
}

/// Rescale a positive-determinant matrix onto the unit-determinant manifold:
/// m / det(m)^{1/N}. Exact fixed point on SL(N), preserves the polar factors.
template <int N>
[[nodiscard]] Mat<N> project_to_sl(const Mat<N>& m) {
  const double det = det_accurate<N>(m);
  if (!(det > 0.0) || !is_finite(m)) {
    throw NonPositiveDeterminant("project_to_sl: determinant must be positive");
  }
  if constexpr (N == 2) {
    return m / std::sqrt(det);
  } else {
    return m / std::cbrt(det);
  }
}

/// Exact inverse through the adjugate and the compensated determinant; for
/// unit-determinant input this is the adjugate itself up to rounding, and it
/// stays accurate for strongly stretched products where the naive determinant
/// would cancel away.
template <int N>
[[nodiscard]] Mat<N> sl_inverse(const Mat<N>& m) {
  if (!is_finite(m)) {
    throw SingularInput("sl_inverse: non-finite entries");
  }
  const double det = det_accurate<N>(m);
  if (det == 0.0) {
    throw SingularInput("sl_inverse: singular matrix");
  }
  Mat<N> adj;
  if constexpr (N == 2) {
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  } else {
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
        const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        adj(i, j) = detail::det2_tf(m(r0, c0), m(r0, c1), m(r1, c0), m(r1, c1)).hi;
      }
    }
  }
  return adj / det;
}

/// Spectral (operator 2-) norm. Closed form for 2x2, symmetric eigensolve of
/// m^T m for 3x3.
template <int N>
[[nodiscard]] double operator_norm(const Mat<N>& m) {
  if constexpr (N == 2) {
    const double t = m.squaredNorm();
    const double d = det2_accurate(m);
    const double disc = std::max(0.0, t * t - 4.0 * d * d);
    return std::sqrt(0.5 * (t + std::sqrt(disc)));
  } else {
    Eigen::SelfAdjointEigenSolver<Mat<N>> es(m.transpose() * m);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
}

// =============================================================================
// Polar decomposition and the symmetric exponential/logarithm
// =============================================================================

template <int N>
struct Polar {
  Mat<N> rotation;  // special orthogonal factor
  Mat<N> stretch;   // symmetric positive definite factor, m = rotation * stretch
};

/**
 * Unique polar decomposition m = R * S of an invertible matrix with positive
 * determinant. Continuity in m (which the homotopy constructions rely on)
 * holds because R = m (m^T m)^{-1/2} and S = (m^T m)^{1/2} are continuous on
 * the positive-determinant matrices.
 */
template <int N>
[[nodiscard]] Polar<N> polar_decompose(const Mat<N>& m) {
  if (!is_finite(m)) {
    throw SingularInput("polar_decompose: non-finite entries");
  }
  if (!(det_accurate<N>(m) > 0.0)) {
    throw SingularInput("polar_decompose: determinant must be positive");
  }
  Eigen::SelfAdjointEigenSolver<Mat<N>> es(m.transpose() * m);
  const Vec<N> ev = es.eigenvalues().cwiseMax(0.0);
  if (!(ev.minCoeff() > 0.0)) {
    throw SingularInput("polar_decompose: singular input");
  }
  const Mat<N> q = es.eigenvectors();
  Mat<N> rotation = m * (q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose());
  // one Newton orthogonality polish
  rotation = 0.5 * rotation * (3.0 * Mat<N>::Identity() - rotation.transpose() * rotation);
  Mat<N> stretch = rotation.transpose() * m;
  stretch = 0.5 * (stretch + stretch.transpose().eval());
  return {rotation, stretch};
}

template <int N>
[[nodiscard]] bool is_rotation(const Mat<N>& m, double tolerance = tol::invariant) {
  return is_finite(m) &&
         (m.transpose() * m - Mat<N>::Identity()).norm() <= tolerance &&
         std::abs(det_accurate<N>(m) - 1.0) <= tolerance;
}

template <int N>
[[nodiscard]] bool is_unit_spd(const Mat<N>& m, double tolerance = tol::invariant) {
  if (!is_finite(m) || (m - m.transpose()).norm() > tolerance) return false;
  Eigen::SelfAdjointEigenSolver<Mat<N>> es(m);
  return es.eigenvalues().minCoeff() > 0.0 &&
         std::abs(det_accurate<N>(m) - 1.0) <= tolerance;
}

/// Symmetric logarithm of a symmetric positive definite matrix. For unit
/// determinant the result is traceless.
template <int N>
[[nodiscard]] Mat<N> spd_log(const Mat<N>& s) {
  if (!is_finite(s) || (s - s.transpose()).norm() > tol::invariant * (1.0 + s.norm())) {
    throw NotSPD("spd_log: input not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat<N>> es(0.5 * (s + s.transpose().eval()));
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw NotSPD("spd_log: input not positive definite");
  }
  const Mat<N> q = es.eigenvectors();
  Mat<N> x = q * es.eigenvalues().array().log().matrix().asDiagonal() * q.transpose();
  return 0.5 * (x + x.transpose().eval());
}

/// Symmetric exponential; traceless symmetric input yields a unit-determinant
/// SPD matrix.
template <int N>
[[nodiscard]] Mat<N> spd_exp(const Mat<N>& x) {
  if (!is_finite(x)) {
    throw NotSPD("spd_exp: non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Mat<N>> es(0.5 * (x + x.transpose().eval()));
  const Mat<N> q = es.eigenvectors();
  Mat<N> s = q * es.eigenvalues().array().exp().matrix().asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose().eval());
}

// =============================================================================
// Planar rotations
// =============================================================================

[[nodiscard]] inline Mat2 rotation2(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// Infinitesimal generator of counterclockwise planar rotation.
[[nodiscard]] inline Mat2 so2_generator() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

/**
 * Rotation angle of the polar factor of a positive-determinant 2x2 matrix,
 * in (-pi, pi]. For m = R(phi) * S with S symmetric positive definite,
 * m(1,0) - m(0,1) = sin(phi) * trace(S) and m(0,0) + m(1,1) = cos(phi) *
 * trace(S), so the angle comes out of a single atan2 without forming the
 * decomposition.
 */
[[nodiscard]] inline double polar_angle(const Mat2& m) {
  return std::atan2(m(1, 0) - m(0, 1), m(0, 0) + m(1, 1));
}

// =============================================================================
// Unit quaternions and the double cover of SO(3)
// =============================================================================
//
// Quaternion coefficients follow the Eigen storage order (x, y, z, w) whenever
// a Vec4 is used.

using Quat = Eigen::Quaterniond;

[[nodiscard]] inline Vec4 quat_identity_coeffs() { return Vec4(0.0, 0.0, 0.0, 1.0); }

/// Rotation matrix of a unit quaternion given as (x, y, z, w) coefficients.
[[nodiscard]] inline Mat3 rotation_from_quat(const Vec4& q) {
  const double w = q(3);
  const Vec3 v = q.head<3>();
  Mat3 vx;
  vx << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return (w * w - v.squaredNorm()) * Mat3::Identity() +
         2.0 * (v * v.transpose()) + 2.0 * w * vx;
}

/// Directional derivative of rotation_from_quat at q along dq.
[[nodiscard]] inline Mat3 rotation_from_quat_derivative(const Vec4& q, const Vec4& dq) {
  const double w = q(3), dw = dq(3);
  const Vec3 v = q.head<3>(), dv = dq.head<3>();
  Mat3 vx, dvx;
  vx << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  dvx << 0.0, -dv.z(), dv.y(), dv.z(), 0.0, -dv.x(), -dv.y(), dv.x(), 0.0;
  return 2.0 * (w * dw - v.dot(dv)) * Mat3::Identity() +
         2.0 * (dv * v.transpose() + v * dv.transpose()) +
         2.0 * (dw * vx + w * dvx);
}

/**
 * Lift a sampled path of rotations to the unit quaternions, choosing signs by
 * continuity. The first element is the lift nearest the identity quaternion;
 * each later element keeps a nonnegative dot product with its predecessor.
 *
 * Throws SamplingTooCoarse when the continuity choice becomes ambiguous
 * (consecutive dot product magnitude below 0.1); the caller is expected to
 * refine the sampling.
 */
[[nodiscard]] inline std::vector<Vec4> quat_lift_path(std::span<const Mat3> rotations) {
  std::vector<Vec4> lift;
  lift.reserve(rotations.size());
  for (const Mat3& r : rotations) {
    Quat q(r);
    Vec4 c = q.coeffs();
    if (lift.empty()) {
      if (c(3) < 0.0) c = -c;
    } else {
      const double dot = c.dot(lift.back());
      if (std::abs(dot) < 0.1) {
        throw SamplingTooCoarse(
            "quat_lift_path: consecutive rotations too far apart for a "
            "continuous lift");
      }
      if (dot < 0.0) c = -c;
    }
    lift.push_back(c);
  }
  return lift;
}

// =============================================================================
// Block embedding SL(2) -> SL(3)
// =============================================================================

/// Adds a neutral third dimension: m goes to diag-block(m, 1).
[[nodiscard]] inline Mat3 block_embed_matrix(const Mat2& m) {
  Mat3 b = Mat3::Identity();
  b.topLeftCorner<2, 2>() = m;
  return b;
}

}  // namespace cocycle

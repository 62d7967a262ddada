#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "cocycle/discrete.hpp"
#include "cocycle/linalg.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

// =============================================================================
// Loops in SL(N)
// =============================================================================

/**
 * A closed loop theta -> M(theta) in SL(N), theta running once around [0,1].
 * The map wraps, i.e. it may be evaluated at any real angle.
 */
template <int N>
struct Loop {
  std::function<Mat<N>(double)> map;
  int resolution = 4096;
};

template <int N>
[[nodiscard]] Loop<N> loop_of(const DiscreteCocycle<N>& a, int resolution = 4096) {
  auto gen = a.generator;
  return {[gen](double theta) { return gen(fractional_part(theta)); }, resolution};
}

/// Group law on loops: traverse l1 on [0, 1/2), then l2 on [1/2, 1].
template <int N>
[[nodiscard]] Loop<N> concatenate(const Loop<N>& l1, const Loop<N>& l2) {
  if ((l1.map(1.0) - l2.map(0.0)).norm() > tol::invariant ||
      (l2.map(1.0) - l1.map(0.0)).norm() > tol::invariant) {
    throw EndpointMismatch("concatenate: loop endpoints do not match");
  }
  auto m1 = l1.map;
  auto m2 = l2.map;
  return {[m1, m2](double theta) {
            const double t = fractional_part(theta);
            return t < 0.5 ? m1(2.0 * t) : m2(2.0 * t - 1.0);
          },
          2 * std::max(l1.resolution, l2.resolution)};
}

// =============================================================================
// Angle lift and winding numbers (SL(2))
// =============================================================================

/**
 * Continuous lift of the rotation angle of the polar factor along a loop,
 * stored as grid samples with linear interpolation. Adjacent samples differ
 * by less than pi/2 and the total increment is a multiple of 2 pi.
 */
struct AngleLift {
  std::vector<double> samples;  // values at theta_i = i / (size - 1)

  [[nodiscard]] int resolution() const {
    return static_cast<int>(samples.size()) - 1;
  }

  [[nodiscard]] double at(double theta) const {
    const double x = std::clamp(theta, 0.0, 1.0) * resolution();
    const int i = std::min(static_cast<int>(x), resolution() - 1);
    const double w = x - i;
    return (1.0 - w) * samples[i] + w * samples[i + 1];
  }

  [[nodiscard]] double total_increment() const {
    return samples.back() - samples.front();
  }
};

namespace detail {
inline constexpr int kMaxLiftResolution = 1 << 20;
}

/**
 * Build the angle lift of a loop's polar rotation factor, doubling the grid
 * until adjacent raw angles differ by less than pi/2 (up to 2^20 samples).
 */
[[nodiscard]] inline AngleLift lift_rotation_angle(const Loop<2>& loop) {
  for (int res = std::max(16, loop.resolution);; res *= 2) {
    std::vector<double> samples(res + 1);
    double prev_raw = polar_angle(loop.map(0.0));
    samples[0] = prev_raw;
    bool ok = true;
    for (int i = 1; i <= res; ++i) {
      const double raw = polar_angle(loop.map(static_cast<double>(i) / res));
      double d = raw - prev_raw;
      d -= two_pi * std::round(d / two_pi);
      if (std::abs(d) >= 0.5 * pi) {
        ok = false;
        break;
      }
      samples[i] = samples[i - 1] + d;
      prev_raw = raw;
    }
    if (ok) {
      const double delta = samples.back() - samples.front();
      if (std::abs(delta - two_pi * std::round(delta / two_pi)) > 1e-6) {
        throw SamplingTooCoarse("angle lift does not close to a multiple of 2 pi");
      }
      return AngleLift{std::move(samples)};
    }
    if (res >= detail::kMaxLiftResolution) {
      throw SamplingTooCoarse("angle lift: refinement cap reached");
    }
  }
}

/// Winding number of an SL(2) loop: the total increment of the lifted polar
/// angle divided by 2 pi. pi_1(SL(2,R)) is isomorphic to Z.
[[nodiscard]] inline int winding_number(const Loop<2>& loop) {
  return static_cast<int>(std::llround(lift_rotation_angle(loop).total_increment() / two_pi));
}

// =============================================================================
// Rotation-part lift (SL(3))
// =============================================================================

/// Quaternion lift of the polar rotation factors of an SL(3) loop on a grid.
struct So3Lift {
  std::vector<Vec4> samples;  // at theta_i = i / (size - 1)

  [[nodiscard]] int resolution() const {
    return static_cast<int>(samples.size()) - 1;
  }

  [[nodiscard]] const Vec4& nearest(double theta) const {
    const int i = static_cast<int>(std::llround(std::clamp(theta, 0.0, 1.0) * resolution()));
    return samples[i];
  }

  /// Gap between the lift endpoints: ~0 for the trivial class, ~2 for the
  /// nontrivial class of pi_1(SL(3,R)) = Z/2Z.
  [[nodiscard]] double closure_gap() const {
    return (samples.back() - samples.front()).norm();
  }
};

[[nodiscard]] inline So3Lift lift_so3_loop(const Loop<3>& loop) {
  for (int res = std::max(16, loop.resolution);; res *= 2) {
    std::vector<Mat3> rotations(res + 1);
    for (int i = 0; i <= res; ++i) {
      rotations[i] = polar_decompose<3>(loop.map(static_cast<double>(i) / res)).rotation;
    }
    try {
      return So3Lift{quat_lift_path(rotations)};
    } catch (const SamplingTooCoarse&) {
      if (res >= detail::kMaxLiftResolution) throw;
    }
  }
}

// =============================================================================
// Nullhomotopy tests
// =============================================================================

[[nodiscard]] inline bool is_nullhomotopic(const Loop<2>& loop) {
  return winding_number(loop) == 0;
}

[[nodiscard]] inline bool is_nullhomotopic(const Loop<3>& loop) {
  const double gap = lift_so3_loop(loop).closure_gap();
  if (gap <= 1e-6) return true;
  if (gap >= 1.9) return false;
  throw SamplingTooCoarse("rotation-part lift endpoint is ambiguous");
}

// =============================================================================
// Homotopies from the identity
// =============================================================================

/**
 * A homotopy h(theta, t) from the identity (t = 0) to a target loop (t = 1),
 * smooth in t, with an explicit t-derivative. Evaluation is organised by
 * theta-slices so that integrating along a fiber pays the per-theta setup
 * (polar decomposition, lifts) once.
 */
template <int N>
struct HomotopyPath {
  struct Slice {
    std::function<Mat<N>(double)> value;       // t -> h(theta, t)
    std::function<Mat<N>(double)> derivative;  // t -> dh/dt(theta, t)
  };

  std::function<Slice(double)> slice;  // theta -> slice

  [[nodiscard]] Mat<N> value(double theta, double t) const {
    return slice(theta).value(t);
  }
  [[nodiscard]] Mat<N> derivative(double theta, double t) const {
    return slice(theta).derivative(t);
  }
};

/**
 * Time reparametrization used to flatten homotopy endpoints:
 *   sigma(t) = t - sin(2 pi t) / (2 pi),  sigma'(t) = 1 - cos(2 pi t),
 * smooth, strictly increasing on (0,1), with sigma'(0) = sigma'(1) = 0.
 */
struct Reparametrizer {
  [[nodiscard]] static double sigma(double t) {
    return t - std::sin(two_pi * t) / two_pi;
  }
  [[nodiscard]] static double sigma_prime(double t) {
    return 1.0 - std::cos(two_pi * t);
  }
};

/// Precompose a homotopy with sigma, making the endpoint t-derivatives vanish.
template <int N>
[[nodiscard]] HomotopyPath<N> reparametrize(const HomotopyPath<N>& raw) {
  auto raw_slice = raw.slice;
  return {[raw_slice](double theta) {
    auto inner = std::make_shared<typename HomotopyPath<N>::Slice>(raw_slice(theta));
    return typename HomotopyPath<N>::Slice{
        [inner](double t) { return inner->value(Reparametrizer::sigma(t)); },
        [inner](double t) {
          return (Reparametrizer::sigma_prime(t) *
                  inner->derivative(Reparametrizer::sigma(t)))
              .eval();
        }};
  }};
}

namespace detail {

// Symmetric-factor data shared by both homotopy constructions: the traceless
// logarithm X of the polar stretch, pre-diagonalised so that exp(s X) is a
// diagonal rescale per evaluation.
template <int N>
struct StretchInterp {
  Mat<N> basis;      // orthonormal eigenvectors of X
  Vec<N> log_ev;     // eigenvalues of X (logs of the stretch eigenvalues)
  Mat<N> x;          // X itself

  explicit StretchInterp(const Mat<N>& stretch) {
    Eigen::SelfAdjointEigenSolver<Mat<N>> es(stretch);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      throw NotSPD("homotopy: polar stretch factor not positive definite");
    }
    basis = es.eigenvectors();
    log_ev = es.eigenvalues().array().log().matrix();
    x = basis * log_ev.asDiagonal() * basis.transpose();
  }

  [[nodiscard]] Mat<N> at(double s) const {
    return basis * (s * log_ev).array().exp().matrix().asDiagonal() *
           basis.transpose();
  }
};

}  // namespace detail

/**
 * Explicit homotopy from the identity to a winding-zero SL(2) loop.
 *
 * With M(theta) = R(l(theta)) S(theta) the polar decomposition and l the
 * closed angle lift, the raw homotopy is
 *   H(theta, s) = R(s l(theta)) exp(s log S(theta)),
 * contracted jointly in the rotation angle and the log of the stretch; the
 * flat-endpoint version is H(theta, sigma(t)) with an analytic t-derivative.
 */
[[nodiscard]] inline HomotopyPath<2> build_homotopy_sl2(const Loop<2>& loop) {
  auto lift = std::make_shared<AngleLift>(lift_rotation_angle(loop));
  const int w = static_cast<int>(std::llround(lift->total_increment() / two_pi));
  if (w != 0) {
    throw NotNullhomotopic("build_homotopy_sl2: loop has winding number " +
                           std::to_string(w));
  }
  auto map = loop.map;
  HomotopyPath<2> raw{[map, lift](double theta) {
    const Mat2 m = map(theta);
    const double raw_angle = polar_angle(m);
    // place the exact angle on the branch of the precomputed lift
    const double guess = lift->at(fractional_part(theta));
    const double angle = raw_angle + two_pi * std::round((guess - raw_angle) / two_pi);
    Mat2 stretch = rotation2(-angle) * m;
    stretch = 0.5 * (stretch + stretch.transpose().eval());
    auto data = std::make_shared<detail::StretchInterp<2>>(stretch);
    const Mat2 j = so2_generator();
    return HomotopyPath<2>::Slice{
        [angle, data](double s) {
          return (rotation2(s * angle) * data->at(s)).eval();
        },
        [angle, data, j](double s) {
          const Mat2 r = rotation2(s * angle);
          const Mat2 e = data->at(s);
          return (angle * (j * r) * e + r * (data->x * e)).eval();
        }};
  }};
  return reparametrize(raw);
}

// =============================================================================
// Stereographic contraction in the unit quaternions (SL(3))
// =============================================================================

namespace detail {

/// Orthonormal frame of R^4 whose first column is the given unit vector.
[[nodiscard]] inline Eigen::Matrix4d frame_from(const Vec4& p) {
  Eigen::Matrix4d f;
  f.col(0) = p;
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&p](int a, int b) { return std::abs(p(a)) < std::abs(p(b)); });
  int col = 1;
  for (int k = 0; k < 4 && col < 4; ++k) {
    Vec4 v = Vec4::Unit(order[k]);
    for (int j = 0; j < col; ++j) v -= v.dot(f.col(j)) * f.col(j);
    const double n = v.norm();
    if (n > 0.1) f.col(col++) = v / n;
  }
  return f;
}

/**
 * Stereographic chart of S^3 from the pole -p, in the orthonormal frame
 * (p, u1, u2, u3): a point q = a p + b . u maps to y = b / (1 + a), which is
 * a diffeomorphism of S^3 minus the pole onto R^3. The contraction segment
 * stays bounded because the pole sits at infinity of the chart.
 */
struct StereographicChart {
  Eigen::Matrix4d frame;  // columns p, u1, u2, u3

  [[nodiscard]] Vec3 project(const Vec4& q) const {
    const Vec4 c = frame.transpose() * q;
    return c.tail<3>() / (1.0 + c(0));
  }

  [[nodiscard]] Vec4 unproject(const Vec3& y) const {
    const double rho = y.squaredNorm();
    Vec4 c;
    c(0) = (1.0 - rho) / (1.0 + rho);
    c.tail<3>() = 2.0 * y / (1.0 + rho);
    return frame * c;
  }

  /// Point and velocity of unproject along a straight chart line y + s dy.
  void unproject_with_velocity(const Vec3& y, const Vec3& dy, Vec4& q,
                               Vec4& dq) const {
    const double rho = y.squaredNorm();
    const double den = 1.0 + rho;
    const double drho = 2.0 * y.dot(dy);
    Vec4 c, dc;
    c(0) = (1.0 - rho) / den;
    c.tail<3>() = 2.0 * y / den;
    dc(0) = -2.0 * drho / (den * den);
    dc.tail<3>() = 2.0 * dy / den - 2.0 * y * (drho / (den * den));
    q = frame * c;
    dq = frame * dc;
  }
};

/// Deterministic quasi-uniform net on S^3 used for the pole search.
[[nodiscard]] inline std::vector<Vec4> sphere_net(int count) {
  SplitMix64 rng(0x51e3e0c4a71c0de5ULL);
  std::vector<Vec4> net(count);
  for (int i = 0; i < count; ++i) net[i] = rng.unit_vector4();
  return net;
}

/// Maximin pole choice: the net point p whose antipode -p stays at least 0.1
/// away from every lift sample (and from the identity).
[[nodiscard]] inline Vec4 choose_projection_point(const std::vector<Vec4>& lift) {
  for (int count : {60, 960}) {
    const std::vector<Vec4> net = sphere_net(count);
    double best = -1.0;
    Vec4 best_p = Vec4::Zero();
    for (const Vec4& p : net) {
      double clearance = (quat_identity_coeffs() + p).norm();
      for (const Vec4& q : lift) {
        clearance = std::min(clearance, (q + p).norm());
        if (clearance < best) break;
      }
      if (clearance > best) {
        best = clearance;
        best_p = p;
      }
    }
    if (best >= 0.1) return best_p;
  }
  throw NoProjectionPoint(
      "no admissible stereographic pole found on the refined sphere net");
}

}  // namespace detail

/**
 * Explicit homotopy from the identity to an SL(3) loop of trivial Z/2 class.
 *
 * The stretch factor contracts through its logarithm exactly as in SL(2). The
 * rotation factor lifts to a closed loop of unit quaternions, which is
 * contracted onto the identity quaternion along straight lines in a
 * stereographic chart whose pole keeps clear of the loop.
 */
[[nodiscard]] inline HomotopyPath<3> build_homotopy_sl3(const Loop<3>& loop) {
  auto lift = std::make_shared<So3Lift>(lift_so3_loop(loop));
  const double gap = lift->closure_gap();
  if (gap > 1e-6) {
    if (gap >= 1.9) {
      throw NotNullhomotopic(
          "build_homotopy_sl3: rotation-part lift does not close (nontrivial "
          "Z/2 class)");
    }
    throw SamplingTooCoarse("build_homotopy_sl3: lift endpoint ambiguous");
  }
  auto chart = std::make_shared<detail::StereographicChart>(
      detail::StereographicChart{detail::frame_from(detail::choose_projection_point(lift->samples))});
  const Vec3 y_id = chart->project(quat_identity_coeffs());
  auto map = loop.map;
  HomotopyPath<3> raw{[map, lift, chart, y_id](double theta) {
    const Mat3 m = map(theta);
    const Polar<3> polar = polar_decompose<3>(m);
    auto data = std::make_shared<detail::StretchInterp<3>>(polar.stretch);
    Vec4 q1 = Quat(polar.rotation).coeffs();
    const Vec4& anchor = lift->nearest(fractional_part(theta));
    const double dot = q1.dot(anchor);
    if (std::abs(dot) < 0.1) {
      throw SamplingTooCoarse("build_homotopy_sl3: lift branch ambiguous");
    }
    if (dot < 0.0) q1 = -q1;
    const Vec3 y1 = chart->project(q1);
    const Vec3 dy = y1 - y_id;
    return HomotopyPath<3>::Slice{
        [chart, y_id, dy, data](double s) {
          const Vec4 q = chart->unproject(y_id + s * dy);
          return (rotation_from_quat(q) * data->at(s)).eval();
        },
        [chart, y_id, dy, data](double s) {
          Vec4 q, dq;
          chart->unproject_with_velocity(y_id + s * dy, dy, q, dq);
          const Mat3 e = data->at(s);
          return (rotation_from_quat_derivative(q, dq) * e +
                  rotation_from_quat(q) * (data->x * e))
              .eval();
        }};
  }};
  return reparametrize(raw);
}

}  // namespace cocycle

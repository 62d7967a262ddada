#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cocycle/driving.hpp"
#include "cocycle/linalg.hpp"

namespace cocycle {

/**
 * Discrete-time cocycle over a circle rotation: a driving rotation together
 * with a continuous generator map theta -> SL(N).
 *
 * Values are immutable after construction; evaluation and n-step products are
 * reentrant and free of shared state.
 */
template <int N>
struct DiscreteCocycle {
  CircleRotation driving;
  std::function<Mat<N>(double)> generator;  // theta in [0,1) -> SL(N)
  std::string family;

  [[nodiscard]] static constexpr int dim() { return N; }

  [[nodiscard]] Mat<N> operator()(double theta) const {
    return generator(fractional_part(theta));
  }
};

/// Evaluate the cocycle generator at a base point.
template <int N>
[[nodiscard]] Mat<N> evaluate(const DiscreteCocycle<N>& a, double theta) {
  return a(theta);
}

namespace detail {

/// Renormalize the determinant of a running product when it is numerically
/// measurable; strongly stretched products are left untouched (their exact
/// determinant drift is bounded by the multiplication count times epsilon).
template <int N>
inline void guarded_renormalize(Mat<N>& p) {
  if (det_measurable<N>(p)) {
    const double det = det_accurate<N>(p);
    if (det > 0.5 && det < 2.0) {
      if constexpr (N == 2) {
        p /= std::sqrt(det);
      } else {
        p /= std::cbrt(det);
      }
    }
  }
}

}  // namespace detail

/**
 * Generator sanity check on a uniform grid: every sample must be special
 * linear and adjacent samples (including the wrap) must stay within 0.5 in
 * Frobenius norm.
 */
template <int N>
void validate_cocycle(const DiscreteCocycle<N>& a, int grid = 1024) {
  Mat<N> prev = a(0.0);
  const Mat<N> first = prev;
  for (int i = 0; i <= grid; ++i) {
    const double theta = static_cast<double>(i % grid) / grid;
    const Mat<N> m = (i == 0) ? first : a(theta);
    if (!is_special_linear<N>(m)) {
      throw SingularInput("cocycle generator leaves SL(" + std::to_string(N) +
                          ") near theta=" + std::to_string(theta));
    }
    if (i > 0 && (m - prev).norm() >= 0.5) {
      throw SamplingTooCoarse("cocycle generator jumps by >= 0.5 between grid "
                              "neighbours near theta=" + std::to_string(theta));
    }
    prev = m;
  }
}

// =============================================================================
// n-step maps in two-sided time
// =============================================================================

namespace detail {

// Ordered product A(theta_{n-1}) ... A(theta_1) A(theta_0) of n >= 0 forward
// steps starting at theta.
template <int N>
Mat<N> forward_product(const DiscreteCocycle<N>& a, double theta, long long n,
                       int renorm_interval) {
  Mat<N> p = Mat<N>::Identity();
  for (long long k = 0; k < n; ++k) {
    p = (a(rotate(a.driving, theta, k)) * p).eval();
    if ((k + 1) % renorm_interval == 0) guarded_renormalize<N>(p);
  }
  return p;
}

}  // namespace detail

/**
 * n-step map in two-sided time: the ordered product of generator values along
 * the orbit for n > 0, the identity for n = 0, and the inverse of the forward
 * product from the shifted base point for n < 0.
 *
 * Rational driving takes the periodic shortcut A^n = (A^q at the shifted
 * point)^{n/q} * A^{n mod q}, with exact residue arithmetic for the angles.
 */
template <int N>
[[nodiscard]] Mat<N> n_step(const DiscreteCocycle<N>& a, double theta, long long n,
                            int renorm_interval = 50) {
  if (n == 0) return Mat<N>::Identity();
  if (n < 0) {
    const double shifted = rotate(a.driving, theta, n);
    return sl_inverse<N>(n_step(a, shifted, -n, renorm_interval));
  }
  if (a.driving.rational && n > a.driving.q) {
    const long long q = a.driving.q;
    const long long cycles = n / q;
    const long long rest = n % q;
    const Mat<N> head = detail::forward_product(a, theta, rest, renorm_interval);
    const Mat<N> period =
        detail::forward_product(a, rotate(a.driving, theta, rest), q, renorm_interval);
    Mat<N> p = head;
    for (long long k = 0; k < cycles; ++k) {
      p = (period * p).eval();
      if ((k + 1) % renorm_interval == 0) detail::guarded_renormalize<N>(p);
    }
    return p;
  }
  return detail::forward_product<N>(a, theta, n, renorm_interval);
}

// =============================================================================
// Named generator families
// =============================================================================

enum class HermanConvention {
  CounterClockwise,  // rotation part R(2 pi theta) with +sin at (1,0)
  Clockwise,
};

/**
 * Herman's cocycle: a full rotation of the plane per loop of the base circle,
 * composed with a fixed hyperbolic stretch diag(lambda, 1/lambda).
 *
 * The rotation part makes the generator loop wind once around SL(2,R), which
 * is exactly what obstructs a natural continuous-time extension. The
 * orientation of the rotation is a convention and both are supported.
 */
inline DiscreteCocycle<2> herman_cocycle(
    double lambda, CircleRotation driving,
    HermanConvention convention = HermanConvention::CounterClockwise) {
  if (!(lambda > 0.0)) throw ConfigError("herman_cocycle: lambda must be positive");
  const double sign = convention == HermanConvention::CounterClockwise ? 1.0 : -1.0;
  auto gen = [lambda, sign](double theta) {
    const double c = std::cos(two_pi * theta);
    const double s = sign * std::sin(two_pi * theta);
    Mat2 m;
    m << c * lambda, -s / lambda, s * lambda, c / lambda;
    return m;
  };
  return {driving, std::move(gen), "herman(lambda=" + std::to_string(lambda) + ")"};
}

/// Constant cocycle theta -> M.
template <int N>
inline DiscreteCocycle<N> constant_cocycle(const Mat<N>& m, CircleRotation driving) {
  if (!is_special_linear<N>(m, 1e-6)) {
    throw SingularInput("constant_cocycle: matrix must be special linear");
  }
  const Mat<N> sl = project_to_sl<N>(m);
  return {driving, [sl](double) { return sl; }, "constant"};
}

inline DiscreteCocycle<2> identity_cocycle2(CircleRotation driving) {
  return constant_cocycle<2>(Mat2::Identity(), driving);
}

inline DiscreteCocycle<3> identity_cocycle3(CircleRotation driving) {
  return constant_cocycle<3>(Mat3::Identity(), driving);
}

/// theta -> R(2 pi k theta): pure rotation loop with winding number k.
inline DiscreteCocycle<2> rotation_power_cocycle(int k, CircleRotation driving) {
  return {driving,
          [k](double theta) { return rotation2(two_pi * k * theta); },
          "rotation-power(k=" + std::to_string(k) + ")"};
}

/// theta -> diag(exp(c sin(2 pi theta)), exp(-c sin(2 pi theta))): diagonal,
/// winding-free family.
inline DiscreteCocycle<2> diagonal_sine_cocycle(double c, CircleRotation driving) {
  return {driving,
          [c](double theta) {
            const double e = std::exp(c * std::sin(two_pi * theta));
            Mat2 m;
            m << e, 0.0, 0.0, 1.0 / e;
            return m;
          },
          "diagonal-sine(c=" + std::to_string(c) + ")"};
}

/// theta -> R(2 pi sin(2 pi theta)) diag(2, 1/2): strongly varying rotation
/// part with winding number zero.
inline DiscreteCocycle<2> wiggle_cocycle(CircleRotation driving) {
  return {driving,
          [](double theta) {
            Mat2 d;
            d << 2.0, 0.0, 0.0, 0.5;
            return (rotation2(two_pi * std::sin(two_pi * theta)) * d).eval();
          },
          "wiggle"};
}

/**
 * Half-speed construction: B over rotation alpha/2 with B_theta = A_{2 theta}.
 * As a loop, B is the concatenation of A with itself, and its n-step maps
 * satisfy B^n_theta = A^n_{2 theta}.
 */
template <int N>
inline DiscreteCocycle<N> half_speed(const DiscreteCocycle<N>& a) {
  auto gen = a.generator;
  return {a.driving.half(),
          [gen](double theta) { return gen(fractional_part(2.0 * theta)); },
          "half-speed(" + a.family + ")"};
}

/// Embed an SL(2) cocycle into SL(3) by adding a neutral third dimension.
inline DiscreteCocycle<3> block_embed(const DiscreteCocycle<2>& a) {
  auto gen = a.generator;
  return {a.driving,
          [gen](double theta) { return block_embed_matrix(gen(theta)); },
          "block-embed(" + a.family + ")"};
}

/**
 * Escape hatch: generator tabulated on a uniform grid with linear
 * interpolation between samples (projected back onto SL). Approximate by
 * construction; closed-form families are preferred whenever available.
 */
template <int N>
inline DiscreteCocycle<N> tabulated_cocycle(std::vector<Mat<N>> samples,
                                            CircleRotation driving) {
  if (samples.size() < 2) throw ConfigError("tabulated_cocycle: need at least 2 samples");
  for (const Mat<N>& m : samples) {
    if (!is_special_linear<N>(m, 1e-6)) {
      throw SingularInput("tabulated_cocycle: sample leaves SL");
    }
  }
  const auto table = std::make_shared<std::vector<Mat<N>>>(std::move(samples));
  auto gen = [table](double theta) {
    const std::size_t n = table->size();
    const double x = fractional_part(theta) * static_cast<double>(n);
    const std::size_t i = std::min(static_cast<std::size_t>(x), n - 1);
    const double w = x - static_cast<double>(i);
    const Mat<N>& lo = (*table)[i];
    const Mat<N>& hi = (*table)[(i + 1) % n];
    return project_to_sl<N>(((1.0 - w) * lo + w * hi).eval());
  };
  return {driving, std::move(gen), "tabulated"};
}

}  // namespace cocycle

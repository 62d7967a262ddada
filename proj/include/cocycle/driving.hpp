#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "cocycle/errors.hpp"

namespace cocycle {

/// Fractional part reduced to [0, 1).
[[nodiscard]] inline double fractional_part(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;
  if (f < 0.0) f += 1.0;
  return f;
}

/**
 * Rotation of the circle [0,1) by a fixed constant. Rational constants are
 * tagged and kept as an exact reduced fraction so that periodic driving is
 * exact in integer arithmetic; irrational constants are plain doubles.
 */
struct CircleRotation {
  double alpha = 0.0;  // in [0, 1)
  bool rational = false;
  long long p = 0;  // valid when rational: alpha = p/q, gcd(p,q) = 1
  long long q = 1;

  static CircleRotation from_rational(long long num, long long den) {
    if (den <= 0) throw ConfigError("CircleRotation: denominator must be positive");
    long long r = num % den;
    if (r < 0) r += den;
    const long long g = std::gcd(r, den);
    CircleRotation rot;
    rot.rational = true;
    rot.p = r / g;
    rot.q = den / g;
    rot.alpha = static_cast<double>(rot.p) / static_cast<double>(rot.q);
    return rot;
  }

  static CircleRotation from_irrational(double a) {
    if (!(a >= 0.0) || !(a < 1.0)) {
      throw ConfigError("CircleRotation: constant must lie in [0, 1)");
    }
    CircleRotation rot;
    rot.alpha = a;
    return rot;
  }

  /// (sqrt(5) - 1) / 2, the conventional maximally Diophantine choice.
  static CircleRotation golden() {
    return from_irrational((std::sqrt(5.0) - 1.0) / 2.0);
  }

  /// Rotation by half the constant (drives the doubled loop).
  [[nodiscard]] CircleRotation half() const {
    if (rational) return from_rational(p, 2 * q);
    return from_irrational(alpha / 2.0);
  }

  [[nodiscard]] std::string describe() const {
    if (rational) return std::to_string(p) + "/" + std::to_string(q);
    return std::to_string(alpha);
  }
};

/**
 * theta + n * alpha mod 1, drift-free in n.
 *
 * Rational constants use exact residue arithmetic. Irrational constants split
 * the product n * alpha into an exact high/low pair via fma, so orbits of
 * length 1e6 and beyond stay within ~1e-15 of the true angle.
 */
[[nodiscard]] inline double rotate(const CircleRotation& rot, double theta, long long n = 1) {
  if (n == 0) return fractional_part(theta);
  if (rot.rational) {
    long long r = static_cast<long long>(
        (static_cast<__int128>(n) * rot.p) % rot.q);
    if (r < 0) r += rot.q;
    return fractional_part(theta + static_cast<double>(r) / static_cast<double>(rot.q));
  }
  const double nd = static_cast<double>(n);
  const double prod = nd * rot.alpha;
  const double err = std::fma(nd, rot.alpha, -prod);
  const double fl = std::floor(prod);
  return fractional_part(theta + (prod - fl) + err);
}

/// Point (theta, r) on the mapping torus, both coordinates in [0, 1).
struct MappingTorusPoint {
  double theta = 0.0;
  double r = 0.0;
};

[[nodiscard]] inline MappingTorusPoint canonical(MappingTorusPoint p,
                                                 const CircleRotation& rot) {
  const double fl = std::floor(p.r);
  double r = p.r - fl;
  long long carry = static_cast<long long>(fl);
  if (r >= 1.0) {
    r -= 1.0;
    ++carry;
  }
  return {rotate(rot, p.theta, carry), r};
}

/**
 * Suspension flow over a circle rotation: points move up the fiber [0,1] at
 * unit speed, and crossing the ceiling applies the rotation to the base
 * coordinate. Defined for all real times, forward and backward.
 */
struct SuspensionFlow {
  CircleRotation rotation;
};

[[nodiscard]] inline MappingTorusPoint suspend(const SuspensionFlow& flow,
                                               MappingTorusPoint p, double t) {
  const double s = p.r + t;
  double fl = std::floor(s);
  double r = s - fl;
  if (r >= 1.0) {  // guard the rounding corner at the ceiling
    r -= 1.0;
    fl += 1.0;
  }
  return {rotate(flow.rotation, p.theta, static_cast<long long>(fl)), r};
}

}  // namespace cocycle

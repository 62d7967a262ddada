#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace cocycle {

/// splitmix64: tiny, platform-independent generator so seeded runs are
/// byte-stable everywhere.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Marsaglia's polar method.
  double gaussian() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  /// Uniform point on the unit sphere of R^dim (dim <= 4).
  Eigen::Vector4d unit_vector4() {
    for (;;) {
      Eigen::Vector4d v;
      for (int i = 0; i < 4; ++i) v(i) = gaussian();
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }
};

}  // namespace cocycle

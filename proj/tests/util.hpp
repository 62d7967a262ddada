#pragma once

#include <cmath>

#include "cocycle/linalg.hpp"
#include "cocycle/random.hpp"

namespace testutil {

using cocycle::Mat;
using cocycle::SplitMix64;

/// Random SL(N) sample with positive determinant, entries O(1).
template <int N>
Mat<N> random_sl(SplitMix64& rng) {
  for (;;) {
    Mat<N> m;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m(i, j) = rng.gaussian();
    double det = cocycle::det_accurate<N>(m);
    if (std::abs(det) < 0.1) continue;
    if (det < 0.0) {
      m.row(0) = -m.row(0).eval();
    }
    return cocycle::project_to_sl<N>(m);
  }
}

/// Random symmetric positive definite matrix with unit determinant.
template <int N>
Mat<N> random_unit_spd(SplitMix64& rng) {
  Mat<N> m = random_sl<N>(rng);
  return cocycle::project_to_sl<N>((m * m.transpose() + 0.1 * Mat<N>::Identity()).eval());
}

/// 3x3 rotation about the z axis.
inline cocycle::Mat3 rotation_z(double angle) {
  cocycle::Mat3 r = cocycle::Mat3::Identity();
  r.topLeftCorner<2, 2>() = cocycle::rotation2(angle);
  return r;
}

/// Generic axis-angle rotation (unit axis).
inline cocycle::Mat3 rotation_axis(const cocycle::Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace testutil

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cocycle/linalg.hpp"
#include "util.hpp"

using namespace cocycle;
using testutil::random_sl;
using testutil::random_unit_spd;
using testutil::rotation_z;

TEST_CASE("compensated determinants survive heavy stretching") {
  Mat2 m;
  const double big = 3.0e7;
  m << big, big - 1.0, big + 1.0, big;  // det = big^2 - (big^2 - 1) = 1
  CHECK(det2_accurate(m) == doctest::Approx(1.0).epsilon(1e-12));

  Mat3 b = Mat3::Identity();
  b.topLeftCorner<2, 2>() = m / 100.0;  // keeps 3x3 minors in the trusted range
  const double expected = 1.0 / (100.0 * 100.0);
  CHECK(det3_accurate(b) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("project_to_sl rescales onto unit determinant") {
  CHECK((project_to_sl<2>((2.0 * Mat2::Identity()).eval()) - Mat2::Identity()).norm() ==
        doctest::Approx(0.0));

  SplitMix64 rng(7);
  const Mat2 sl = random_sl<2>(rng);
  CHECK((project_to_sl<2>(sl) - sl).norm() <= 1e-15);  // fixed point on SL

  Mat2 off = sl * std::sqrt(1.01);  // det 1.01
  CHECK(std::abs(det2_accurate(project_to_sl<2>(off)) - 1.0) <= 1e-12);

  Mat2 flip;
  flip << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS((void)project_to_sl<2>(flip), NonPositiveDeterminant);
}

TEST_CASE("polar decomposition: trivial factors") {
  Mat2 d;
  d << 2.0, 0.0, 0.0, 0.5;
  const Polar<2> pd = polar_decompose<2>(d);
  CHECK((pd.rotation - Mat2::Identity()).norm() <= 1e-12);
  CHECK((pd.stretch - d).norm() <= 1e-12);

  const Mat2 r = rotation2(pi / 3.0);
  const Polar<2> pr = polar_decompose<2>(r);
  CHECK((pr.rotation - r).norm() <= 1e-12);
  CHECK((pr.stretch - Mat2::Identity()).norm() <= 1e-12);
}

TEST_CASE("polar decomposition recomposes random SL samples") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat2 m = random_sl<2>(rng);
    const Polar<2> p = polar_decompose<2>(m);
    CHECK((p.rotation * p.stretch - m).norm() <= 1e-8);
    CHECK(is_rotation<2>(p.rotation));
    CHECK(is_unit_spd<2>(p.stretch, 1e-8));
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat3 m = random_sl<3>(rng);
    const Polar<3> p = polar_decompose<3>(m);
    CHECK((p.rotation * p.stretch - m).norm() <= 1e-8);
    CHECK(is_rotation<3>(p.rotation));
  }
  Mat2 reflect;
  reflect << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS((void)polar_decompose<2>(reflect), SingularInput);
}

TEST_CASE("spd log/exp closed forms and round trips") {
  CHECK(spd_log<2>(Mat2::Identity()).norm() <= 1e-14);

  Mat2 s;
  const double e = std::exp(1.0);
  s << e, 0.0, 0.0, 1.0 / e;
  Mat2 expected;
  expected << 1.0, 0.0, 0.0, -1.0;
  CHECK((spd_log<2>(s) - expected).norm() <= 1e-12);

  SplitMix64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat2 spd = random_unit_spd<2>(rng);
    const Mat2 x = spd_log<2>(spd);
    CHECK(std::abs(x.trace()) <= 1e-8);  // unit determinant -> traceless log
    CHECK((spd_exp<2>(x) - spd).norm() <= 1e-9);
    const Mat3 spd3 = random_unit_spd<3>(rng);
    CHECK((spd_exp<3>(spd_log<3>(spd3)) - spd3).norm() <= 1e-9);
  }

  Mat2 asym;
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS((void)spd_log<2>(asym), NotSPD);
  Mat2 negdef;
  negdef << -1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS((void)spd_log<2>(negdef), NotSPD);
}

TEST_CASE("operator norm and inverse") {
  CHECK(operator_norm<2>(Mat2::Identity()) == doctest::Approx(1.0));
  Mat2 d;
  d << 2.0, 0.0, 0.0, 0.5;
  CHECK(operator_norm<2>(d) == doctest::Approx(2.0));

  SplitMix64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const Mat3 m = random_sl<3>(rng);
    CHECK((m * sl_inverse<3>(m) - Mat3::Identity()).norm() <= 1e-10);
    // |det| = 1 forces the top singular value to be at least 1
    CHECK(operator_norm<3>(m) >= 1.0 - 1e-12);
    CHECK(operator_norm<2>(random_sl<2>(rng)) >= 1.0 - 1e-12);
  }
}

TEST_CASE("quaternion lift: constant, single and double winding") {
  const int n = 64;

  std::vector<Mat3> constant(n + 1, Mat3::Identity());
  const auto lift_const = quat_lift_path(constant);
  for (const Vec4& q : lift_const) {
    CHECK((q - quat_identity_coeffs()).norm() <= 1e-14);
  }

  // one full turn about z ends at the antipode in the double cover
  std::vector<Mat3> turn(n + 1);
  for (int i = 0; i <= n; ++i) turn[i] = rotation_z(two_pi * i / n);
  const auto lift_turn = quat_lift_path(turn);
  CHECK((lift_turn.front() - quat_identity_coeffs()).norm() <= 1e-14);
  CHECK((lift_turn.back() + quat_identity_coeffs()).norm() <= 1e-9);

  // two full turns close up
  std::vector<Mat3> two_turns(2 * n + 1);
  for (int i = 0; i <= 2 * n; ++i) two_turns[i] = rotation_z(2.0 * two_pi * i / (2 * n));
  const auto lift_two = quat_lift_path(two_turns);
  CHECK((lift_two.back() - lift_two.front()).norm() <= 1e-9);

  // endpoint parity of k turns
  for (int k = 0; k <= 3; ++k) {
    const int m = std::max(1, 64 * std::max(1, k));
    std::vector<Mat3> path(m + 1);
    for (int i = 0; i <= m; ++i) path[i] = rotation_z(k * two_pi * i / m);
    const auto lift = quat_lift_path(path);
    const Vec4 expected = (k % 2 == 0 ? 1.0 : -1.0) * quat_identity_coeffs();
    CHECK((lift.back() - expected).norm() <= 1e-9);
    for (std::size_t i = 0; i < lift.size(); ++i) {
      CHECK((rotation_from_quat(lift[i]) - path[i]).norm() <= 1e-12);
    }
  }

  // 90-degree jumps are ambiguous for the continuity rule
  std::vector<Mat3> coarse{rotation_z(0.0), rotation_z(pi)};
  CHECK_THROWS_AS((void)quat_lift_path(coarse), SamplingTooCoarse);
}

TEST_CASE("quaternion rotation derivative matches finite differences") {
  SplitMix64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    Vec4 q = rng.unit_vector4();
    Vec4 dq = rng.unit_vector4();
    dq -= dq.dot(q) * q;  // keep it tangent so q + t dq stays near the sphere
    const double h = 1e-6;
    const Vec4 qp = (q + h * dq).normalized();
    const Vec4 qm = (q - h * dq).normalized();
    const Mat3 fd = (rotation_from_quat(qp) - rotation_from_quat(qm)) / (2.0 * h);
    CHECK((rotation_from_quat_derivative(q, dq) - fd).norm() <= 1e-5);
  }
}

TEST_CASE("block embedding preserves action and norms") {
  SplitMix64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat2 m = random_sl<2>(rng);
    const Mat3 b = block_embed_matrix(m);
    CHECK(std::abs(det3_accurate(b) - det2_accurate(m)) <= 1e-12);
    const Vec2 v(rng.gaussian(), rng.gaussian());
    const double w = rng.gaussian();
    const Vec3 out = b * Vec3(v(0), v(1), w);
    CHECK((out.head<2>() - m * v).norm() <= 1e-12);
    CHECK(out(2) == doctest::Approx(w));
    CHECK(std::abs(operator_norm<3>(b) - operator_norm<2>(m)) <= 1e-10);
  }
}

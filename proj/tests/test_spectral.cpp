#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cocycle/spectral.hpp"
#include "util.hpp"

using namespace cocycle;

namespace {

const CircleRotation kGolden = CircleRotation::golden();

DiscreteCocycle<2> const_diag(double top) {
  Mat2 d;
  d << top, 0.0, 0.0, 1.0 / top;
  return constant_cocycle<2>(d, kGolden);
}

double herman_bound(double lambda) { return std::log(0.5 * (lambda + 1.0 / lambda)); }

}  // namespace

TEST_CASE("fk series: identity, constant, Herman lower bound") {
  const ConvergenceSeries id = fk_series(identity_cocycle2(kGolden), 0.3, 1000);
  for (double v : id.value) CHECK(std::abs(v) <= 1e-12);

  const ConvergenceSeries cd = fk_series(const_diag(2.0), 0.1, 2000);
  CHECK(cd.last() == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  for (double v : cd.value) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  const DiscreteCocycle<2> h = herman_cocycle(2.0, kGolden);
  const ConvergenceSeries hs = fk_series(h, 0.3, 100000);
  CHECK(hs.last() >= herman_bound(2.0) - 0.01);
  CHECK(hs.n.back() == 100000);
}

TEST_CASE("lyapunov spectrum: exact constant cases and the SL(2) sum rule") {
  const LyapunovReport r2 = lyapunov_spectrum(const_diag(2.0), 0.0, 4000);
  CHECK(r2.exponents[0] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(r2.exponents[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-6));

  Mat3 d3 = Mat3::Identity();
  d3(0, 0) = 2.0;
  d3(2, 2) = 0.5;
  const LyapunovReport r3 = lyapunov_spectrum(constant_cocycle<3>(d3, kGolden), 0.0, 4000);
  CHECK(r3.exponents[0] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(std::abs(r3.exponents[1]) <= 1e-6);
  CHECK(r3.exponents[2] == doctest::Approx(-std::log(2.0)).epsilon(1e-6));

  const DiscreteCocycle<2> h = herman_cocycle(2.0, kGolden);
  const LyapunovReport rh = lyapunov_spectrum(h, 0.3, 100000);
  CHECK(std::abs(rh.sum()) <= 1e-3);
  CHECK(rh.exponents[0] >= herman_bound(2.0) - 0.01);
  // agreement with the norm-based estimator
  const ConvergenceSeries hs = fk_series(h, 0.3, 100000);
  CHECK(std::abs(rh.exponents[0] - hs.last()) <= 1e-3);
}

TEST_CASE("vector exponents in both time directions") {
  // unit start vector: the series vanishes identically for the identity
  const ConvergenceSeries id =
      vector_exponent(identity_cocycle2(kGolden), 0.2, Vec2(1.0, 0.0), 500);
  for (double v : id.value) CHECK(std::abs(v) <= 1e-12);
  // non-unit start: the whole series is log||x|| / n, exactly
  const ConvergenceSeries scaled =
      vector_exponent(identity_cocycle2(kGolden), 0.2, Vec2(1.0, 2.0), 500, TimeDirection::Forward, 1);
  for (std::size_t i = 0; i < scaled.n.size(); ++i) {
    CHECK(std::abs(static_cast<double>(scaled.n[i]) * scaled.value[i] -
                   std::log(std::sqrt(5.0))) <= 1e-12);
  }

  const ConvergenceSeries down =
      vector_exponent(const_diag(2.0), 0.2, Vec2(0.0, 1.0), 2000);
  CHECK(down.last() == doctest::Approx(-std::log(2.0)).epsilon(1e-9));

  // e2 lies in the lambda = -log 2 Oseledets space, so forward and backward
  // exponents agree there; e1 gives +log 2 backward
  const ConvergenceSeries back = vector_exponent(const_diag(2.0), 0.2, Vec2(0.0, 1.0),
                                                 2000, TimeDirection::Backward);
  CHECK(back.n.back() == -2000);
  CHECK(back.last() == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
  const ConvergenceSeries back1 = vector_exponent(const_diag(2.0), 0.2, Vec2(1.0, 0.0),
                                                  2000, TimeDirection::Backward);
  CHECK(back1.last() == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  CHECK_THROWS_AS(
      (void)vector_exponent(const_diag(2.0), 0.2, Vec2(0.0, 0.0), 10), ZeroVector);
}

TEST_CASE("neutral axis of the embedded extension carries zero exponent") {
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(herman_cocycle(2.0, kGolden));
  const ConvergenceSeries fwd =
      vector_exponent(c, {0.3, 0.0}, Vec3(0.0, 0.0, 1.0), 10000);
  CHECK(std::abs(fwd.last()) <= 1e-3);
  const ConvergenceSeries bwd = vector_exponent(c, {0.3, 0.0}, Vec3(0.0, 0.0, 1.0),
                                                10000, TimeDirection::Backward);
  CHECK(std::abs(bwd.last()) <= 1e-3);
}

TEST_CASE("oseledets directions: exact axes for constant diagonal") {
  const DirectionField<2> field = oseledets_directions(const_diag(2.0), 16, 300);
  for (int i = 0; i < 16; ++i) {
    CHECK((field.unstable[i] - Vec2::UnitX()).norm() <= 1e-12);
    CHECK((field.stable[i] - Vec2::UnitY()).norm() <= 1e-12);
  }
  CHECK(field.rates[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("oseledets directions: Herman invariance and degenerate detection") {
  const DiscreteCocycle<2> h = herman_cocycle(2.0, kGolden);
  CHECK(oseledets_invariance_residual(h, 16, 10000) <= 1e-4);

  // lambda = 1 is a pure rotation family: no hyperbolicity to resolve
  CHECK_THROWS_AS((void)oseledets_directions(herman_cocycle(1.0, kGolden), 4, 500),
                  DegenerateSpectrum);
}

TEST_CASE("oseledets directions of the SL(3) extension: neutral direction is e3") {
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(herman_cocycle(2.0, kGolden));
  const DirectionField<3> field = oseledets_directions(c, 16, 10000);
  for (int i = 0; i < 16; ++i) {
    CHECK((field.neutral[i] - Vec3::UnitZ()).norm() <= 1e-6);
    CHECK(std::abs(field.unstable[i](2)) <= 1e-6);  // unstable stays in the plane
    CHECK(std::abs(field.stable[i](2)) <= 1e-6);
  }
  CHECK(std::abs(field.rates[1]) <= 1e-3);  // middle exponent ~ 0
}

TEST_CASE("projective skew product: steps and occupancy") {
  const DiscreteCocycle<2> id = identity_cocycle2(kGolden);
  const ProjectivePoint p0{0.2, Vec2(0.6, 0.8)};
  const ProjectivePoint p1 = projective_step(id, p0);
  CHECK(p1.theta == doctest::Approx(rotate(kGolden, 0.2, 1)));
  CHECK((p1.direction - Vec2(0.6, 0.8)).norm() <= 1e-12);

  // invariant axis of the constant diagonal cocycle
  ProjectivePoint q{0.1, Vec2(0.0, 1.0)};
  for (int k = 0; k < 5; ++k) q = projective_step(const_diag(2.0), q);
  CHECK((q.direction - Vec2(0.0, 1.0)).norm() <= 1e-12);

  // identity cocycle never leaves its starting direction: occupancy is a line
  const OccupancyGrid line =
      projective_orbit_occupancy(id, {0.1, Vec2::UnitX()}, 200000, 100);
  CHECK(line.coverage() <= 0.011);

  // weak hyperbolicity: the orbit sweeps essentially the whole torus at
  // desk scale
  const DiscreteCocycle<2> h11 = herman_cocycle(1.1, kGolden);
  const OccupancyGrid grid =
      projective_orbit_occupancy(h11, {0.1, Vec2::UnitX()}, 1000000, 100);
  CHECK(grid.coverage() >= 0.99);

  // strong hyperbolicity glues the orbit to the (dense) unstable graph and
  // slows the sweep down by orders of magnitude
  const DiscreteCocycle<2> h2 = herman_cocycle(2.0, kGolden);
  const OccupancyGrid glued =
      projective_orbit_occupancy(h2, {0.1, Vec2::UnitX()}, 1000000, 100);
  CHECK(glued.coverage() >= 0.2);
  CHECK(glued.coverage() <= 0.6);
}

TEST_CASE("finite-time Lyapunov exponent properties") {
  // constant diagonal with x = e1: the scaling shift is exact to rounding
  const LePropertyReport exact =
      le_property_check(const_diag(2.0), 0.0, Vec2(1.0, 0.0), 500);
  CHECK(exact.scaling_residual <= 1e-12);
  CHECK(exact.pushforward_residual <= 1e-12);
  CHECK(exact.max_rule_residual <= 1e-12);
  CHECK(exact.min_rule_residual <= 1e-12);
  CHECK(exact.max_rule_limit_gap <= 1e-2);
  CHECK(exact.pass());

  const LePropertyReport h =
      le_property_check(herman_cocycle(2.0, kGolden), 0.3, Vec2(0.7, -0.2), 2000);
  CHECK(h.scaling_residual <= 1e-9);
  CHECK(h.pushforward_residual <= 1e-9);
  CHECK(h.pass());

  // subadditivity at finite n carries the start-norm correction:
  // value_n <= max exponent + log||x|| / n
  const double mixed =
      vector_exponent(const_diag(2.0), 0.0, Vec2(2.0, 1.0), 400).last();
  CHECK(mixed <= std::log(2.0) + std::log(std::sqrt(5.0)) / 400.0 + 1e-12);
}

TEST_CASE("integer-time sampling from interior base points falls back to integration") {
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(herman_cocycle(2.0, kGolden));
  // r != 0 has no recorded product path; unit-time solves are used instead
  const ConvergenceSeries s = fk_series(c, {0.3, 0.5}, 5, TimeSampling::ProductPath, 1);
  REQUIRE(s.n.size() == 5);
  for (double v : s.value) CHECK(std::isfinite(v));
  // the fractional offset washes out of the growth rate: compare the 5-step
  // value with the base-fiber product path at matching accuracy
  const ConvergenceSeries base = fk_series(c, {0.3, 0.0}, 5, TimeSampling::ProductPath, 1);
  CHECK(std::abs(s.last() - base.last()) <= 0.5);
}

TEST_CASE("spectrum transfer from Herman to its continuous-time extension") {
  const DiscreteCocycle<2> h = herman_cocycle(2.0, kGolden);
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(h);
  const SpectrumCompareReport report = extension_spectrum_compare(h, c, 16, 2000);
  CHECK(report.max_product_discrepancy <= 1e-8);
  CHECK(report.max_integrated_discrepancy <= 5e-6);
  CHECK(report.pass());
}

TEST_CASE("exploratory diagnostics stay well-formed") {
  const DiscreteCocycle<2> h = herman_cocycle(2.0, kGolden);
  const auto osc = oseledets_oscillation(h, {256, 512, 1024}, 400);
  REQUIRE(osc.size() == 3);
  for (const auto& [res, variation] : osc) {
    CHECK(variation >= 0.0);
    CHECK(variation <= 0.5 * pi + 1e-9);
  }

  const auto windows = fk_gap_diagnostic(h, 0.3, 4096);
  REQUIRE(!windows.empty());
  for (const auto& w : windows) {
    CHECK(w.min_value <= w.max_value);
    CHECK(std::isfinite(w.min_value));
  }
}

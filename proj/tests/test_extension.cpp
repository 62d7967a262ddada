#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cocycle/extension.hpp"
#include "cocycle/spectral.hpp"
#include "util.hpp"

using namespace cocycle;

namespace {

const CircleRotation kGolden = CircleRotation::golden();

DiscreteCocycle<3> herman_embedded(double lambda = 2.0) {
  return block_embed(half_speed(herman_cocycle(lambda, kGolden)));
}

}  // namespace

TEST_CASE("generator of the identity homotopy vanishes") {
  const Loop<2> id_loop{[](double) { return Mat2::Identity(); }, 128};
  const GeneratorField<2> g = generator_from_homotopy(build_homotopy_sl2(id_loop));
  for (double theta : {0.0, 0.3, 0.8}) {
    for (double r : {0.0, 0.4, 1.0}) {
      CHECK(g(theta, r).norm() <= 1e-12);
    }
  }
}

TEST_CASE("generator of the diagonal homotopy: closed form") {
  Mat2 d;
  d << 2.0, 0.0, 0.0, 0.5;
  const Loop<2> const_loop{[d](double) { return d; }, 128};
  const GeneratorField<2> g = generator_from_homotopy(build_homotopy_sl2(const_loop));
  const double ln2 = std::log(2.0);
  for (double theta : {0.1, 0.7}) {
    for (double r : {0.0, 0.2, 0.5, 0.8, 1.0}) {
      Mat2 expected;
      expected << ln2, 0.0, 0.0, -ln2;
      expected *= Reparametrizer::sigma_prime(r);
      CHECK((g(theta, r) - expected).norm() <= 1e-10);
    }
  }
}

TEST_CASE("generator invariants for the embedded Herman homotopy") {
  const DiscreteCocycle<3> be = herman_embedded();
  const HomotopyPath<3> h = build_homotopy_sl3(loop_of(be));
  const GeneratorField<3> g = generator_from_homotopy(h);

  // traceless after projection, small drift before it
  double worst_trace = 0.0;
  double sup_norm = 0.0;
  for (int i = 0; i < 64; ++i) {
    const auto slice = g.slice(i / 64.0);
    for (int j = 0; j <= 64; ++j) {
      const Mat3 value = slice.at(j / 64.0);
      worst_trace = std::max(worst_trace, std::abs(value.trace()));
      sup_norm = std::max(sup_norm, value.norm());
    }
  }
  CHECK(worst_trace <= 1e-8);
  CHECK(generator_trace_drift(h, 64, 64) <= 1e-5);

  // the generator vanishes toward the seam
  double near_seam = 0.0;
  for (int i = 0; i < 64; ++i) {
    const auto slice = g.slice(i / 64.0);
    near_seam = std::max(near_seam, slice.at(1e-3).norm());
    near_seam = std::max(near_seam, slice.at(1.0 - 1e-3).norm());
  }
  CHECK(near_seam <= 1e-2 * sup_norm);
  // seam values themselves are zero to rounding
  for (int i = 0; i < 16; ++i) {
    const auto slice = g.slice(i / 16.0);
    CHECK(slice.at(0.0).norm() <= 1e-6);
    CHECK(slice.at(1.0).norm() <= 1e-6);
  }
}

TEST_CASE("generator trace fault detection") {
  // a homotopy whose derivative is inconsistent with its values
  HomotopyPath<2> broken{[](double) {
    return HomotopyPath<2>::Slice{
        [](double t) {
          Mat2 m;
          m << 1.0 + t, 0.0, 0.0, 1.0 / (1.0 + t);
          return m;
        },
        [](double t) {
          Mat2 m;  // derivative of the wrong sign in the lower block
          m << 1.0, 0.0, 0.0, 1.0 / ((1.0 + t) * (1.0 + t));
          return m;
        }};
  }};
  CHECK_THROWS_AS((void)generator_from_homotopy(broken), TraceDriftTooLarge);
}

TEST_CASE("integrate: zero field and constant diagonal field") {
  const SuspensionFlow flow{kGolden};
  const ContinuousCocycle<2> zero{
      GeneratorField<2>::from_function([](double, double) { return Mat2::Zero(); },
                                       "zero"),
      flow,
      {},
      nullptr};
  CHECK((integrate(zero, {0.3, 0.0}, 0.0) - Mat2::Identity()).norm() == 0.0);  // exact
  CHECK((integrate(zero, {0.3, 0.0}, 7.0) - Mat2::Identity()).norm() <= 1e-13);
  CHECK((integrate(zero, {0.3, 0.25}, -5.0) - Mat2::Identity()).norm() <= 1e-13);

  const double c = 0.5;
  const ContinuousCocycle<2> constant{
      GeneratorField<2>::from_function(
          [c](double, double) {
            Mat2 m;
            m << c, 0.0, 0.0, -c;
            return m;
          },
          "constant-diag"),
      flow,
      {},
      nullptr};
  Mat2 expected;
  expected << std::exp(c), 0.0, 0.0, std::exp(-c);
  CHECK((integrate(constant, {0.1, 0.0}, 1.0) - expected).norm() <= 1e-10);
  Mat2 inverse_expected;
  inverse_expected << std::exp(-c), 0.0, 0.0, std::exp(c);
  CHECK((integrate(constant, {0.1, 0.0}, -1.0) - inverse_expected).norm() <= 1e-10);

  CHECK_THROWS_AS((void)integrate(constant, {0.1, 0.0}, 0.5004999), StepNotDividing);
  ContinuousCocycle<2> bad = constant;
  bad.integrator.step = 0.3;  // does not divide 1
  CHECK_THROWS_AS((void)integrate(bad, {0.1, 0.0}, 1.0), ConfigError);
}

TEST_CASE("natural extension: identity and constant cocycles") {
  const ContinuousCocycle<2> id = natural_extension(identity_cocycle2(kGolden));
  CHECK((integrate(id, {0.42, 0.0}, 3.0) - Mat2::Identity()).norm() <= 1e-10);

  Mat2 d;
  d << 2.0, 0.0, 0.0, 0.5;
  const ContinuousCocycle<2> c = natural_extension(constant_cocycle<2>(d, kGolden));
  CHECK((integrate(c, {0.9, 0.0}, 1.0) - d).norm() <= 1e-8);

  CHECK_THROWS_AS((void)natural_extension(herman_cocycle(2.0, kGolden)),
                  NotNullhomotopic);
}

TEST_CASE("natural extension of a wiggly SL(2) cocycle hits the discrete contract") {
  const DiscreteCocycle<2> w = wiggle_cocycle(kGolden);
  const ContinuousCocycle<2> c = natural_extension(w);
  double worst = 0.0;
  for (int i = 0; i < 32; ++i) {
    const double theta = i / 32.0;
    worst = std::max(worst, (integrate(c, {theta, 0.0}, 1.0) - w(theta)).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("half-speed extension: driving constant and fidelity") {
  const DiscreteCocycle<3> a = block_embed(herman_cocycle(2.0, kGolden));
  const ContinuousCocycle<3> c = extend_half_speed(a);
  CHECK(c.driving.rotation.alpha == doctest::Approx(a.driving.alpha / 2.0).epsilon(1e-15));

  double worst = 0.0;
  for (int i = 0; i < 32; ++i) {
    const double theta = i / 32.0;
    const Mat3 phi1 = integrate(c, {theta, 0.0}, 1.0);
    const Mat3 expected = a(fractional_part(2.0 * theta));
    worst = std::max(worst, (phi1 - expected).norm());
  }
  CHECK(worst <= 1e-6);

  const ContinuousCocycle<3> id3 =
      extend_half_speed(block_embed(identity_cocycle2(kGolden)));
  CHECK((integrate(id3, {0.2, 0.0}, 2.0) - Mat3::Identity()).norm() <= 1e-10);
}

TEST_CASE("sl2-via-embedding extension acts block-diagonally at integer times") {
  const DiscreteCocycle<2> h = herman_cocycle(2.0, kGolden);
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(h);
  SplitMix64 rng(71);
  double worst_block = 0.0, worst_neutral = 0.0, worst_negative = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double theta = i / 16.0;
    const double two_theta = fractional_part(2.0 * theta);
    const Mat3 phi1 = integrate(c, {theta, 0.0}, 1.0);
    const Vec2 v(rng.gaussian(), rng.gaussian());
    const double w = rng.gaussian();
    const Vec3 out = phi1 * Vec3(v(0), v(1), w);
    worst_block = std::max(worst_block, (out.head<2>() - h(two_theta) * v).norm());
    worst_neutral = std::max(worst_neutral, std::abs(out(2) - w));

    // negative time realizes the inverse of the shifted forward product
    const Mat3 phim1 = integrate(c, {theta, 0.0}, -1.0);
    const double back = fractional_part(2.0 * rotate(c.driving.rotation, theta, -1));
    const Mat3 expected = block_embed_matrix(sl_inverse<2>(h(back)));
    worst_negative = std::max(worst_negative, (phim1 - expected).norm());
  }
  CHECK(worst_block <= 1e-6);
  CHECK(worst_neutral <= 1e-8);
  CHECK(worst_negative <= 1e-6);
}

TEST_CASE("continuous cocycle property and time reversal") {
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(herman_cocycle(2.0, kGolden));
  SplitMix64 rng(83);
  double worst_prop = 0.0, worst_rev = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const MappingTorusPoint p{rng.uniform(), 0.0};
    const double s = std::round(rng.uniform(-4.0, 4.0) * 8.0) / 8.0;  // on the step grid
    const double t = std::round(rng.uniform(-4.0, 4.0) * 8.0) / 8.0;
    const Mat3 joint = integrate(c, p, s + t);
    const Mat3 split = integrate(c, suspend(c.driving, p, s), t) * integrate(c, p, s);
    worst_prop = std::max(worst_prop, (joint - split).norm());

    const Mat3 fwd = integrate(c, p, t);
    const Mat3 bwd = integrate(c, suspend(c.driving, p, t), -t);
    worst_rev = std::max(worst_rev, (bwd * fwd - Mat3::Identity()).norm());
  }
  CHECK(worst_prop <= 1e-6);
  CHECK(worst_rev <= 1e-6);
}

TEST_CASE("integration across the seam from interior base points") {
  const ContinuousCocycle<3> c = extend_sl2_via_embedding(herman_cocycle(2.0, kGolden));
  const MappingTorusPoint p{0.3, 0.375};
  const Mat3 whole = integrate(c, p, 1.25);
  const Mat3 part = integrate(c, suspend(c.driving, p, 0.625), 0.625) *
                    integrate(c, p, 0.625);
  CHECK((whole - part).norm() <= 1e-8);
}

TEST_CASE("cached-grid generator approximates the exact field") {
  const DiscreteCocycle<2> w = wiggle_cocycle(kGolden);
  const ContinuousCocycle<2> exact = natural_extension(w);
  const GeneratorField<2> cached = cache_generator(exact.generator, 128, 128);
  CHECK(cached.provenance.find("approximate") != std::string::npos);
  double worst = 0.0;
  SplitMix64 rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = rng.uniform();
    const double r = rng.uniform();
    worst = std::max(worst, (cached(theta, r) - exact.generator(theta, r)).norm());
  }
  CHECK(worst <= 0.05);  // bilinear error at this grid; approximate by design
  CHECK(worst >= 1e-9);  // and genuinely distinct from the exact field

  // integrating the cached field stays close to the exact solution
  ContinuousCocycle<2> approx = exact;
  approx.generator = cache_generator(exact.generator);
  const Mat2 a = integrate(approx, {0.3, 0.0}, 1.0);
  const Mat2 b = integrate(exact, {0.3, 0.0}, 1.0);
  CHECK((a - b).norm() <= 5e-3);
  CHECK((a - b).norm() >= 1e-12);
}

TEST_CASE("RK4 order: halving the step cuts the error fourth-order") {
  const DiscreteCocycle<2> w = wiggle_cocycle(kGolden);
  IntegratorConfig coarse{4e-3, 50};
  IntegratorConfig half{2e-3, 50};
  IntegratorConfig reference{1e-5, 50};
  const ContinuousCocycle<2> c_coarse = natural_extension(w, coarse);
  ContinuousCocycle<2> c_half = c_coarse;
  c_half.integrator = half;
  ContinuousCocycle<2> c_ref = c_coarse;
  c_ref.integrator = reference;

  const MappingTorusPoint p{0.37, 0.0};
  const Mat2 ref = integrate(c_ref, p, 1.0);
  const double e_coarse = (integrate(c_coarse, p, 1.0) - ref).norm();
  const double e_half = (integrate(c_half, p, 1.0) - ref).norm();
  REQUIRE(e_half > 0.0);
  CHECK(e_coarse / e_half >= 12.0);
}

TEST_CASE("verify_extension: clean pass and injected det fault") {
  const DiscreteCocycle<3> a = herman_embedded();
  const DiscreteCocycle<3> b = half_speed(a);
  const ContinuousCocycle<3> c = extend_half_speed(a);
  const ExtensionReport report = verify_extension(c, b, 4, 16);
  CHECK(report.fidelity_ok());
  CHECK(report.det_ok());
  CHECK(report.cocycle_ok());
  CHECK(report.pass());
  CHECK(report.max_error[4] == 0.0);  // n = 0 is exact

  // identity extension: residuals at rounding level
  const ContinuousCocycle<2> id = natural_extension(identity_cocycle2(kGolden));
  const ExtensionReport id_report = verify_extension(id, identity_cocycle2(kGolden), 3, 8);
  for (double e : id_report.max_error) CHECK(e <= 1e-11);

  // corrupt the generator by a trace offset and expect the det flag
  ContinuousCocycle<3> corrupted = c;
  auto base_slice = c.generator.slice;
  corrupted.generator.slice = [base_slice](double theta) {
    auto inner = std::make_shared<GeneratorField<3>::Slice>(base_slice(theta));
    return GeneratorField<3>::Slice{[inner](double r) {
      return (inner->at(r) + 1e-3 * Mat3::Identity()).eval();
    }};
  };
  const ExtensionReport bad = verify_extension(corrupted, b, 2, 4);
  CHECK_FALSE(bad.det_ok());
}

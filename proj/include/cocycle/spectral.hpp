#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cocycle/discrete.hpp"
#include "cocycle/extension.hpp"
#include "cocycle/linalg.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

// =============================================================================
// Series and report types
// =============================================================================

/// Sequence of (n, value) pairs tracking (1/n) log norms along an orbit.
struct ConvergenceSeries {
  std::vector<long long> n;
  std::vector<double> value;
  std::string label;
  double base_theta = 0.0;
  double base_r = 0.0;
  std::string norm = "op2";

  [[nodiscard]] double last() const { return value.empty() ? 0.0 : value.back(); }
};

struct LyapunovReport {
  std::vector<double> exponents;  // descending
  std::vector<ConvergenceSeries> series;
  std::vector<double> tail_delta;  // value(N) - value(N/2) per exponent
  long long steps = 0;

  [[nodiscard]] double sum() const {
    return std::accumulate(exponents.begin(), exponents.end(), 0.0);
  }
};

/// Estimated Oseledets directions over a theta-grid, sign-canonicalized.
template <int N>
struct DirectionField {
  std::vector<double> thetas;
  std::vector<Vec<N>> unstable;
  std::vector<Vec<N>> stable;
  std::vector<Vec<N>> neutral;  // only populated for N = 3
  std::vector<double> rates;    // estimated stretch rates, descending
  long long steps = 0;
};

struct ProjectivePoint {
  double theta = 0.0;
  Vec2 direction = Vec2::UnitX();
};

// =============================================================================
// Integer-time orbits
// =============================================================================

/// The time-1 matrices along an orbit: matrix(k) maps time k to time k+1.
template <int N>
struct StepOrbit {
  std::function<Mat<N>(long long)> matrix;
};

template <int N>
[[nodiscard]] StepOrbit<N> step_orbit(const DiscreteCocycle<N>& a, double theta0) {
  return {[a, theta0](long long k) { return a(rotate(a.driving, theta0, k)); }};
}

enum class TimeSampling {
  ProductPath,  // exact integer-time cocycle, when the extension records one
  Integrated,   // RK4 unit-time solves
};

/**
 * Integer-time view of a continuous cocycle. Growth-rate limits over real
 * time reduce to integer times (the fractional correction is uniformly
 * bounded and vanishes under the 1/t scaling), so estimators run on time-1
 * matrices: either the recorded exact product path or integrated unit steps.
 */
template <int N>
[[nodiscard]] StepOrbit<N> step_orbit(const ContinuousCocycle<N>& c, MappingTorusPoint p,
                                      TimeSampling mode = TimeSampling::ProductPath) {
  if (mode == TimeSampling::ProductPath && c.time1 && p.r == 0.0) {
    return step_orbit(*c.time1, p.theta);
  }
  auto cc = std::make_shared<ContinuousCocycle<N>>(c);
  return {[cc, p](long long k) {
    return integrate(*cc, suspend(cc->driving, p, static_cast<double>(k)), 1.0);
  }};
}

// =============================================================================
// Furstenberg-Kesten series
// =============================================================================

namespace detail {

inline long long series_stride(long long steps) {
  return std::max<long long>(1, steps / 512);
}

}  // namespace detail

/**
 * (1/n) log ||Phi^n|| along an orbit, computed incrementally with a
 * Frobenius-renormalized running product (the log scale is accumulated
 * separately, so runs of 1e7 steps cannot overflow). Recorded values use the
 * operator 2-norm.
 */
template <int N>
[[nodiscard]] ConvergenceSeries fk_series_orbit(const StepOrbit<N>& orbit,
                                                long long steps, long long stride = 0) {
  if (stride <= 0) stride = detail::series_stride(steps);
  ConvergenceSeries out;
  Mat<N> p = Mat<N>::Identity();
  double log_scale = 0.0;
  for (long long k = 0; k < steps; ++k) {
    p = (orbit.matrix(k) * p).eval();
    const double f = p.norm();
    log_scale += std::log(f);
    p /= f;
    const long long n = k + 1;
    if (n % stride == 0 || n == steps) {
      out.n.push_back(n);
      out.value.push_back((log_scale + std::log(operator_norm<N>(p))) / n);
    }
  }
  return out;
}

template <int N>
[[nodiscard]] ConvergenceSeries fk_series(const DiscreteCocycle<N>& a, double theta,
                                          long long steps, long long stride = 0) {
  ConvergenceSeries s = fk_series_orbit(step_orbit(a, theta), steps, stride);
  s.label = a.family;
  s.base_theta = fractional_part(theta);
  return s;
}

template <int N>
[[nodiscard]] ConvergenceSeries fk_series(const ContinuousCocycle<N>& c,
                                          MappingTorusPoint p, long long steps,
                                          TimeSampling mode = TimeSampling::ProductPath,
                                          long long stride = 0) {
  ConvergenceSeries s = fk_series_orbit(step_orbit(c, p, mode), steps, stride);
  s.label = c.generator.provenance;
  s.base_theta = p.theta;
  s.base_r = p.r;
  return s;
}

// =============================================================================
// Lyapunov spectrum via QR re-orthonormalization
// =============================================================================

namespace detail {

template <int N>
void qr_step(const Mat<N>& m, Mat<N>& q, Vec<N>& log_diag) {
  Eigen::HouseholderQR<Mat<N>> qr(m * q);
  Mat<N> qn = qr.householderQ();
  const Mat<N> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int i = 0; i < N; ++i) {
    const double d = r(i, i);
    log_diag(i) = std::log(std::abs(d));
    if (d < 0.0) qn.col(i) = -qn.col(i);
  }
  q = qn;
}

}  // namespace detail

/**
 * Full Lyapunov spectrum estimate: push an orthonormal frame, re-factor every
 * step, and average the log diagonal stretches. For unit-determinant cocycles
 * the exponents sum to zero up to rounding.
 */
template <int N>
[[nodiscard]] LyapunovReport lyapunov_spectrum_orbit(const StepOrbit<N>& orbit,
                                                     long long steps,
                                                     long long stride = 0) {
  if (stride <= 0) stride = detail::series_stride(steps);
  LyapunovReport report;
  report.steps = steps;
  report.series.assign(N, ConvergenceSeries{});
  Mat<N> q = Mat<N>::Identity();
  Vec<N> sums = Vec<N>::Zero();
  Vec<N> log_diag;
  std::vector<double> halfway(N, 0.0);
  for (long long k = 0; k < steps; ++k) {
    detail::qr_step<N>(orbit.matrix(k), q, log_diag);
    sums += log_diag;
    const long long n = k + 1;
    if (n == steps / 2) {
      for (int i = 0; i < N; ++i) halfway[i] = sums(i) / n;
    }
    if (n % stride == 0 || n == steps) {
      for (int i = 0; i < N; ++i) {
        report.series[i].n.push_back(n);
        report.series[i].value.push_back(sums(i) / n);
      }
    }
  }
  report.exponents.resize(N);
  report.tail_delta.resize(N);
  for (int i = 0; i < N; ++i) {
    report.exponents[i] = sums(i) / steps;
    report.tail_delta[i] = report.exponents[i] - halfway[i];
  }
  // QR delivers the filtration order; enforce descending exponents
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return report.exponents[a] > report.exponents[b];
  });
  LyapunovReport sorted = report;
  for (int i = 0; i < N; ++i) {
    sorted.exponents[i] = report.exponents[order[i]];
    sorted.series[i] = report.series[order[i]];
    sorted.tail_delta[i] = report.tail_delta[order[i]];
  }
  return sorted;
}

template <int N>
[[nodiscard]] LyapunovReport lyapunov_spectrum(const DiscreteCocycle<N>& a, double theta,
                                               long long steps, long long stride = 0) {
  return lyapunov_spectrum_orbit(step_orbit(a, theta), steps, stride);
}

template <int N>
[[nodiscard]] LyapunovReport lyapunov_spectrum(
    const ContinuousCocycle<N>& c, MappingTorusPoint p, long long steps,
    TimeSampling mode = TimeSampling::ProductPath, long long stride = 0) {
  return lyapunov_spectrum_orbit(step_orbit(c, p, mode), steps, stride);
}

// =============================================================================
// Per-vector exponents in two-sided time
// =============================================================================

enum class TimeDirection { Forward, Backward };

/**
 * (1/n) log ||Phi^n x|| with n -> +infinity (forward) or n -> -infinity
 * (backward; the 1/n factor is then negative). The initial log ||x|| is kept
 * in the accumulation so norm homogeneity holds exactly per term.
 */
template <int N>
[[nodiscard]] ConvergenceSeries vector_exponent_orbit(const StepOrbit<N>& orbit,
                                                      Vec<N> x, long long steps,
                                                      TimeDirection direction,
                                                      long long stride = 0) {
  const double x_norm = x.norm();
  if (!(x_norm > 0.0)) throw ZeroVector("vector_exponent: zero start vector");
  if (stride <= 0) stride = detail::series_stride(steps);
  ConvergenceSeries out;
  out.norm = "vec2";
  Vec<N> v = x / x_norm;
  double log_scale = std::log(x_norm);
  for (long long k = 0; k < steps; ++k) {
    if (direction == TimeDirection::Forward) {
      v = (orbit.matrix(k) * v).eval();
    } else {
      v = (sl_inverse<N>(orbit.matrix(-k - 1)) * v).eval();
    }
    const double f = v.norm();
    log_scale += std::log(f);
    v /= f;
    const long long n = k + 1;
    if (n % stride == 0 || n == steps) {
      const long long signed_n = direction == TimeDirection::Forward ? n : -n;
      out.n.push_back(signed_n);
      out.value.push_back(log_scale / static_cast<double>(signed_n));
    }
  }
  return out;
}

template <int N>
[[nodiscard]] ConvergenceSeries vector_exponent(const DiscreteCocycle<N>& a, double theta,
                                                const Vec<N>& x, long long steps,
                                                TimeDirection direction = TimeDirection::Forward,
                                                long long stride = 0) {
  ConvergenceSeries s =
      vector_exponent_orbit(step_orbit(a, theta), x, steps, direction, stride);
  s.label = a.family;
  s.base_theta = fractional_part(theta);
  return s;
}

template <int N>
[[nodiscard]] ConvergenceSeries vector_exponent(const ContinuousCocycle<N>& c,
                                                MappingTorusPoint p, const Vec<N>& x,
                                                long long steps,
                                                TimeDirection direction = TimeDirection::Forward,
                                                TimeSampling mode = TimeSampling::ProductPath,
                                                long long stride = 0) {
  ConvergenceSeries s =
      vector_exponent_orbit(step_orbit(c, p, mode), x, steps, direction, stride);
  s.label = c.generator.provenance;
  s.base_theta = p.theta;
  s.base_r = p.r;
  return s;
}

// =============================================================================
// Oseledets directions
// =============================================================================

namespace detail {

template <int N>
void canonicalize_sign(Vec<N>& v) {
  for (int i = 0; i < N; ++i) {
    if (std::abs(v(i)) > 1e-9) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

/// Generic start vector shared by all direction estimates.
template <int N>
[[nodiscard]] Vec<N> generic_vector(SplitMix64& rng) {
  Vec<N> v;
  for (int i = 0; i < N; ++i) v(i) = rng.gaussian();
  const double n = v.norm();
  return n > 1e-12 ? Vec<N>(v / n) : Vec<N>::Unit(0);
}

}  // namespace detail

/**
 * Estimate the unstable direction at theta by pushing an orthonormal frame
 * forward from flow^{-steps}(theta); the leading column converges to E^u, and
 * for d = 3 the second column spans the next filtration direction. The stable
 * direction comes from the symmetric backward push with inverse factors.
 *
 * Throws DegenerateSpectrum when the top two estimated stretch rates at the
 * given depth are closer than 1e-3.
 */
template <int N>
[[nodiscard]] DirectionField<N> oseledets_directions(const DiscreteCocycle<N>& a,
                                                     int theta_grid, long long steps,
                                                     std::uint64_t seed = 2024) {
  DirectionField<N> field;
  field.steps = steps;
  field.thetas.resize(theta_grid);
  field.unstable.resize(theta_grid);
  field.stable.resize(theta_grid);
  if constexpr (N == 3) field.neutral.resize(theta_grid);

  Vec<N> rate_sums = Vec<N>::Zero();
  for (int i = 0; i < theta_grid; ++i) {
    const double theta = static_cast<double>(i) / theta_grid;
    field.thetas[i] = theta;

    Mat<N> q = Mat<N>::Identity();
    Vec<N> log_diag;
    Vec<N> sums = Vec<N>::Zero();
    for (long long k = -steps; k < 0; ++k) {
      detail::qr_step<N>(a(rotate(a.driving, theta, k)), q, log_diag);
      sums += log_diag;
    }
    // columns are in start-frame order; invariant coordinate subspaces (the
    // block-embedded case) can leave them out of rate order, so pick columns
    // by their measured stretch rate
    std::array<int, N> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&sums](int x, int y) { return sums(x) > sums(y); });
    Vec<N> sorted_rates;
    for (int j = 0; j < N; ++j) sorted_rates(j) = sums(order[j]) / static_cast<double>(steps);
    rate_sums += sorted_rates;
    Vec<N> eu = q.col(order[0]);
    detail::canonicalize_sign<N>(eu);
    field.unstable[i] = eu;
    if constexpr (N == 3) {
      Vec<N> e0 = q.col(order[1]);
      detail::canonicalize_sign<N>(e0);
      field.neutral[i] = e0;
    }

    SplitMix64 rng(seed);
    Vec<N> v = detail::generic_vector<N>(rng);
    for (long long k = steps - 1; k >= 0; --k) {
      v = (sl_inverse<N>(a(rotate(a.driving, theta, k))) * v).eval();
      v /= v.norm();
    }
    detail::canonicalize_sign<N>(v);
    field.stable[i] = v;
  }
  rate_sums /= static_cast<double>(theta_grid);
  field.rates.assign(rate_sums.data(), rate_sums.data() + N);
  if (field.rates[0] - field.rates[1] < 1e-3) {
    throw DegenerateSpectrum(
        "oseledets_directions: top stretch rates are degenerate at this depth");
  }
  return field;
}

template <int N>
[[nodiscard]] DirectionField<N> oseledets_directions(const ContinuousCocycle<N>& c,
                                                     int theta_grid, long long steps,
                                                     std::uint64_t seed = 2024) {
  if (!c.time1) {
    throw ConfigError("oseledets_directions: continuous cocycle lacks an "
                      "integer-time product path");
  }
  return oseledets_directions(*c.time1, theta_grid, steps, seed);
}

/// Angle between two directions in projective space.
template <int N>
[[nodiscard]] double projective_angle(const Vec<N>& u, const Vec<N>& v) {
  const double c = std::min(1.0, std::abs(u.normalized().dot(v.normalized())));
  return std::acos(c);
}

/**
 * Push-forward invariance residual of the estimated unstable field: the
 * largest projective angle between A(theta) E^u(theta) and an independent
 * estimate of E^u at the rotated point, over a theta-grid.
 */
template <int N>
[[nodiscard]] double oseledets_invariance_residual(const DiscreteCocycle<N>& a,
                                                   int theta_grid, long long steps) {
  auto unstable_at = [&](double theta) {
    Vec<N> v = Vec<N>::Unit(0);
    SplitMix64 rng(99);
    v = detail::generic_vector<N>(rng);
    for (long long k = -steps; k < 0; ++k) {
      v = (a(rotate(a.driving, theta, k)) * v).eval();
      v /= v.norm();
    }
    return v;
  };
  double worst = 0.0;
  for (int i = 0; i < theta_grid; ++i) {
    const double theta = static_cast<double>(i) / theta_grid;
    const Vec<N> pushed = a(theta) * unstable_at(theta);
    const Vec<N> there = unstable_at(rotate(a.driving, theta, 1));
    worst = std::max(worst, projective_angle<N>(pushed, there));
  }
  return worst;
}

// =============================================================================
// Projective skew product
// =============================================================================

/// One step of the projective skew product (theta, v) -> (theta + alpha, H v).
[[nodiscard]] inline ProjectivePoint projective_step(const DiscreteCocycle<2>& h,
                                                     ProjectivePoint p) {
  Vec2 v = h(p.theta) * p.direction;
  v /= v.norm();
  detail::canonicalize_sign<2>(v);
  return {rotate(h.driving, p.theta, 1), v};
}

struct OccupancyGrid {
  int bins = 100;
  long long steps = 0;
  std::vector<long long> counts;  // row-major: bins x bins over S^1 x P^1

  [[nodiscard]] double coverage() const {
    const long long occupied =
        std::count_if(counts.begin(), counts.end(), [](long long c) { return c > 0; });
    return static_cast<double>(occupied) / static_cast<double>(counts.size());
  }
};

/**
 * Occupancy histogram of a projective orbit over an S^1 x P^1 cell grid; the
 * drift-free angle evaluation keeps million-step orbits honest.
 */
[[nodiscard]] inline OccupancyGrid projective_orbit_occupancy(const DiscreteCocycle<2>& h,
                                                              ProjectivePoint start,
                                                              long long steps,
                                                              int bins = 100) {
  OccupancyGrid grid;
  grid.bins = bins;
  grid.steps = steps;
  grid.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
  Vec2 v = start.direction.normalized();
  for (long long k = 0; k < steps; ++k) {
    const double theta = rotate(h.driving, start.theta, k);
    double ang = std::atan2(v(1), v(0));
    if (ang < 0.0) ang += pi;
    if (ang >= pi) ang -= pi;
    const int row = std::min(bins - 1, static_cast<int>(theta * bins));
    const int col = std::min(bins - 1, static_cast<int>(ang / pi * bins));
    ++grid.counts[static_cast<std::size_t>(row) * bins + col];
    v = (h(theta) * v).eval();
    v /= v.norm();
  }
  return grid;
}

// =============================================================================
// Finite-time Lyapunov-exponent properties
// =============================================================================

struct LePropertyReport {
  double scaling_residual = 0.0;      // norm homogeneity, per-term
  double pushforward_residual = 0.0;  // orbit shift, per-term after reindexing
  double max_rule_residual = 0.0;     // forward max rule vs closed form
  double min_rule_residual = 0.0;     // backward min rule vs closed form
  double max_rule_limit_gap = 0.0;    // distance of the estimate to max{lambda}
  double min_rule_limit_gap = 0.0;

  [[nodiscard]] bool pass() const {
    return scaling_residual <= 1e-9 && pushforward_residual <= 1e-9 &&
           max_rule_residual <= 1e-10 && min_rule_residual <= 1e-10;
  }
};

/**
 * Finite-time restatements of the standard Lyapunov-exponent properties:
 * scaling invariance and push-forward invariance hold exactly (up to
 * rounding) at every n and are checked per term on the given cocycle; the
 * forward max rule and backward min rule are checked on a constant diagonal
 * cocycle against closed forms.
 */
template <int N>
[[nodiscard]] LePropertyReport le_property_check(const DiscreteCocycle<N>& a, double theta,
                                                 const Vec<N>& x, long long steps) {
  LePropertyReport report;

  // (scaling) series for beta x differs from the series for x by log|beta|/n
  const double beta = 10.0;
  const ConvergenceSeries base = vector_exponent(a, theta, x, steps, TimeDirection::Forward, 1);
  const ConvergenceSeries scaled =
      vector_exponent(a, theta, (beta * x).eval(), steps, TimeDirection::Forward, 1);
  for (std::size_t i = 0; i < base.n.size(); ++i) {
    const double n = static_cast<double>(base.n[i]);
    const double diff = n * (scaled.value[i] - base.value[i]) - std::log(beta);
    report.scaling_residual = std::max(report.scaling_residual, std::abs(diff));
  }

  // (push-forward) the series at (flow theta, A_theta x) is the shifted series
  const Vec<N> y = a(theta) * x;
  const ConvergenceSeries shifted = vector_exponent(
      a, rotate(a.driving, theta, 1), y, steps - 1, TimeDirection::Forward, 1);
  for (std::size_t i = 0; i < shifted.n.size(); ++i) {
    const double lhs = static_cast<double>(shifted.n[i]) * shifted.value[i];
    const double rhs = static_cast<double>(base.n[i + 1]) * base.value[i + 1];
    report.pushforward_residual =
        std::max(report.pushforward_residual,
                 std::abs(lhs - rhs) / static_cast<double>(shifted.n[i]));
  }

  // (max/min rules) constant diag(2, 1/2), start e1 + e2
  const long long n_rule = std::min<long long>(steps, 200);
  Mat2 d;
  d << 2.0, 0.0, 0.0, 0.5;
  const DiscreteCocycle<2> diag = constant_cocycle<2>(d, a.driving);
  const Vec2 mixed = Vec2(1.0, 1.0);
  const double log2 = std::log(2.0);

  const ConvergenceSeries fwd =
      vector_exponent(diag, 0.0, mixed, n_rule, TimeDirection::Forward);
  // ||diag(2,1/2)^n (1,1)|| = 2^n sqrt(1 + 16^{-n})
  const double pow_f = static_cast<double>(n_rule) * log2;
  const double closed_f =
      log2 + 0.5 * std::log1p(std::exp(-4.0 * pow_f)) / static_cast<double>(n_rule);
  report.max_rule_residual = std::abs(fwd.last() - closed_f);
  report.max_rule_limit_gap = std::abs(fwd.last() - log2);

  const ConvergenceSeries bwd =
      vector_exponent(diag, 0.0, mixed, n_rule, TimeDirection::Backward);
  report.min_rule_residual = std::abs(bwd.last() - (-closed_f));
  report.min_rule_limit_gap = std::abs(bwd.last() - (-log2));

  return report;
}

// =============================================================================
// Spectrum transfer between a cocycle and its embedded extension
// =============================================================================

struct SpectrumCompareReport {
  double max_product_discrepancy = 0.0;   // exact product path, per grid point
  double max_integrated_discrepancy = 0.0;  // RK4 spot checks at short times
  int grid = 0;
  long long steps = 0;

  [[nodiscard]] bool pass(double product_tol = 1e-8, double integrated_tol = 5e-6) const {
    return max_product_discrepancy <= product_tol &&
           max_integrated_discrepancy <= integrated_tol;
  }
};

/**
 * The embedded half-speed extension preserves Furstenberg-Kesten values:
 * the growth rate of Phi at (theta, 0) equals that of the original cocycle
 * at 2 theta, because the integer-time matrices coincide up to the neutral
 * block. Compared on the exact product path per grid point, plus integrated
 * spot checks at n = 5.
 */
[[nodiscard]] inline SpectrumCompareReport extension_spectrum_compare(
    const DiscreteCocycle<2>& a, const ContinuousCocycle<3>& c, int grid,
    long long steps) {
  SpectrumCompareReport report;
  report.grid = grid;
  report.steps = steps;
  for (int i = 0; i < grid; ++i) {
    const double theta = static_cast<double>(i) / grid;
    const double ext = fk_series(c, {theta, 0.0}, steps).last();
    const double orig = fk_series(a, fractional_part(2.0 * theta), steps).last();
    report.max_product_discrepancy =
        std::max(report.max_product_discrepancy, std::abs(ext - orig));
  }
  for (int i = 0; i < 5; ++i) {
    const double theta = (i + 0.5) / 5.0;
    const Mat3 integrated = integrate(c, {theta, 0.0}, 5.0);
    const double ext = std::log(operator_norm<3>(integrated)) / 5.0;
    const double orig = fk_series(a, fractional_part(2.0 * theta), 5).last();
    report.max_integrated_discrepancy =
        std::max(report.max_integrated_discrepancy, std::abs(ext - orig));
  }
  return report;
}

// =============================================================================
// Exploratory diagnostics
// =============================================================================

/**
 * Oscillation diagnostic for the unstable direction field: the largest
 * projective angle between adjacent grid estimates, per resolution. Variation
 * that fails to decay under refinement is the numerical signature of a
 * discontinuous splitting. Exploratory output, not a verified gate.
 */
template <int N>
[[nodiscard]] std::vector<std::pair<int, double>> oseledets_oscillation(
    const DiscreteCocycle<N>& a, const std::vector<int>& resolutions, long long steps,
    std::uint64_t seed = 2024) {
  std::vector<std::pair<int, double>> out;
  SplitMix64 rng(seed);
  const Vec<N> start = detail::generic_vector<N>(rng);
  for (int res : resolutions) {
    double worst = 0.0;
    Vec<N> prev = Vec<N>::Zero();
    Vec<N> first = Vec<N>::Zero();
    for (int i = 0; i < res; ++i) {
      const double theta = static_cast<double>(i) / res;
      Vec<N> v = start;
      for (long long k = -steps; k < 0; ++k) {
        v = (a(rotate(a.driving, theta, k)) * v).eval();
        v /= v.norm();
      }
      if (i == 0) {
        first = v;
      } else {
        worst = std::max(worst, projective_angle<N>(prev, v));
      }
      prev = v;
    }
    worst = std::max(worst, projective_angle<N>(prev, first));
    out.emplace_back(res, worst);
  }
  return out;
}

/// Min/max of the growth series over a dyadic time window.
struct DyadicWindowStat {
  long long from = 0;
  long long to = 0;
  double min_value = 0.0;
  double max_value = 0.0;
};

/**
 * liminf/limsup gap diagnostic for the Furstenberg-Kesten sequence: the
 * spread of (1/n) log ||Phi^n|| over dyadic windows. A gap that persists for
 * all window sizes is consistent with non-existence of the limit at this
 * base point. Exploratory output only.
 */
template <int N>
[[nodiscard]] std::vector<DyadicWindowStat> fk_gap_diagnostic(const DiscreteCocycle<N>& a,
                                                              double theta,
                                                              long long steps) {
  const ConvergenceSeries s = fk_series(a, theta, steps, 1);
  std::vector<DyadicWindowStat> out;
  for (long long lo = 16; lo < steps; lo *= 2) {
    const long long hi = std::min(steps, 2 * lo);
    DyadicWindowStat w{lo, hi, std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};
    for (long long n = lo; n < hi; ++n) {
      const double v = s.value[static_cast<std::size_t>(n - 1)];
      w.min_value = std::min(w.min_value, v);
      w.max_value = std::max(w.max_value, v);
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace cocycle

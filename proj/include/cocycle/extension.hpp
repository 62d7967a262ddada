#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cocycle/discrete.hpp"
#include "cocycle/driving.hpp"
#include "cocycle/homotopy.hpp"
#include "cocycle/linalg.hpp"

namespace cocycle {

// =============================================================================
// Generator fields on the mapping torus
// =============================================================================

/**
 * Traceless-matrix field G(theta, r) on the mapping torus, the right-hand
 * side of the cocycle ODE. Organised in theta-slices like HomotopyPath so a
 * fiber integration pays the per-theta setup once.
 */
template <int N>
struct GeneratorField {
  struct Slice {
    std::function<Mat<N>(double)> at;  // r -> G(theta, r)
  };

  std::function<Slice(double)> slice;
  std::string provenance;

  [[nodiscard]] Mat<N> operator()(double theta, double r) const {
    return slice(theta).at(r);
  }

  static GeneratorField from_function(std::function<Mat<N>(double, double)> g,
                                      std::string provenance_label) {
    return {[g](double theta) {
              return Slice{[g, theta](double r) { return g(theta, r); }};
            },
            std::move(provenance_label)};
  }
};

/**
 * Generator of the homotopy: G(theta, r) = dh/dr (theta, r) * h(theta, r)^{-1}.
 *
 * The raw value is traceless only up to the accuracy of the homotopy
 * derivative; it is projected exactly traceless, and a correction beyond
 * trace_tol signals a broken derivative.
 */
template <int N>
[[nodiscard]] GeneratorField<N> generator_from_homotopy(const HomotopyPath<N>& h,
                                                        double trace_tol = 1e-5) {
  auto h_slice = h.slice;
  GeneratorField<N> field{
      [h_slice, trace_tol](double theta) {
        auto hs = std::make_shared<typename HomotopyPath<N>::Slice>(h_slice(theta));
        return typename GeneratorField<N>::Slice{[hs, trace_tol](double r) {
          const Mat<N> value = hs->value(r);
          const Mat<N> deriv = hs->derivative(r);
          Mat<N> g = deriv * sl_inverse<N>(value);
          const double tr = g.trace();
          if (std::abs(tr) > trace_tol) {
            throw TraceDriftTooLarge(
                "generator trace correction " + std::to_string(tr) +
                " exceeds bound; homotopy derivative inconsistent");
          }
          g -= (tr / N) * Mat<N>::Identity();
          return g;
        }};
      },
      "homotopy"};
  // early sanity sweep; full grids are exercised by the verification suite
  for (int i = 0; i < 8; ++i) {
    const auto s = field.slice(i / 8.0);
    for (int j = 1; j < 8; ++j) (void)s.at(j / 8.0);
  }
  return field;
}

/**
 * Grid-cached view of a generator field: values precomputed on a uniform
 * (theta, r) grid and bilinearly interpolated, wrapping in theta. Useful for
 * profiling hot integrations; approximate by construction, so the on-demand
 * field remains the default for all verified runs.
 */
template <int N>
[[nodiscard]] GeneratorField<N> cache_generator(const GeneratorField<N>& field,
                                                int grid_theta = 256, int grid_r = 256) {
  auto table = std::make_shared<std::vector<Mat<N>>>(
      static_cast<std::size_t>(grid_theta) * (grid_r + 1));
  for (int i = 0; i < grid_theta; ++i) {
    const auto slice = field.slice(static_cast<double>(i) / grid_theta);
    for (int j = 0; j <= grid_r; ++j) {
      (*table)[static_cast<std::size_t>(i) * (grid_r + 1) + j] =
          slice.at(static_cast<double>(j) / grid_r);
    }
  }
  return {[table, grid_theta, grid_r](double theta) {
            return typename GeneratorField<N>::Slice{[table, grid_theta, grid_r,
                                                      theta](double r) {
              const double x = fractional_part(theta) * grid_theta;
              const double y = std::clamp(r, 0.0, 1.0) * grid_r;
              const int i = std::min(static_cast<int>(x), grid_theta - 1);
              const int j = std::min(static_cast<int>(y), grid_r - 1);
              const double u = x - i, v = y - j;
              const auto at = [&](int a, int b) -> const Mat<N>& {
                return (*table)[static_cast<std::size_t>(a % grid_theta) * (grid_r + 1) + b];
              };
              return ((1.0 - u) * (1.0 - v) * at(i, j) + u * (1.0 - v) * at(i + 1, j) +
                      (1.0 - u) * v * at(i, j + 1) + u * v * at(i + 1, j + 1))
                  .eval();
            }};
          },
          field.provenance + "+cached(approximate)"};
}

/// Largest pre-projection trace magnitude of the generator over a grid.
template <int N>
[[nodiscard]] double generator_trace_drift(const HomotopyPath<N>& h, int grid_theta,
                                           int grid_r) {
  double worst = 0.0;
  for (int i = 0; i < grid_theta; ++i) {
    const auto hs = h.slice(static_cast<double>(i) / grid_theta);
    for (int j = 0; j <= grid_r; ++j) {
      const double r = static_cast<double>(j) / grid_r;
      const Mat<N> g = hs.derivative(r) * sl_inverse<N>(hs.value(r));
      worst = std::max(worst, std::abs(g.trace()));
    }
  }
  return worst;
}

// =============================================================================
// Continuous-time cocycles
// =============================================================================

/// Classical fixed-step RK4 with windowed determinant renormalization.
struct IntegratorConfig {
  double step = 1e-3;
  int renorm_interval = 50;

  void validate() const {
    if (!(step > 0.0) || step > 0.1) {
      throw ConfigError("IntegratorConfig: step must lie in (0, 0.1]");
    }
    const double k = std::round(1.0 / step);
    if (std::abs(k * step - 1.0) > 1e-12) {
      throw ConfigError("IntegratorConfig: step must divide 1");
    }
    if (renorm_interval < 1) {
      throw ConfigError("IntegratorConfig: renorm interval must be positive");
    }
  }
};

/**
 * Continuous-time cocycle over a suspension flow: the fundamental solution of
 * dPhi/dt = G(flow^t(point)) Phi, produced by RK4 integration of the
 * generator field.
 *
 * time1 optionally records the discrete cocycle whose n-step maps the
 * integer-time values reproduce (available for every extension construction);
 * spectral estimators use it as the exact product path at integer times.
 */
template <int N>
struct ContinuousCocycle {
  GeneratorField<N> generator;
  SuspensionFlow driving;
  IntegratorConfig integrator;
  std::shared_ptr<const DiscreteCocycle<N>> time1;

  [[nodiscard]] static constexpr int dim() { return N; }
};

/// Determinant bookkeeping accumulated across renormalization windows.
struct DetDriftLog {
  double max_window_error = 0.0;    // worst |det - 1| of a window propagator
  double accumulated_log = 0.0;     // sum of |log det| removed by renormalization
  double residual_log = 0.0;        // signed sum of log det over renormalized
                                    // windows: the log determinant of the exact
                                    // product of the stored window matrices
  double direct_det_error = -1.0;   // |det - 1| of the assembled solution, when measurable
  long long windows = 0;
};

namespace detail {

// One RK4 step of dW/ds = G(flow^{s}(p)) W, where s is time relative to p.
// The slice cache keeps the last two theta-fibers so steps that straddle the
// ceiling stay cheap.
template <int N>
struct GeneratorSampler {
  const GeneratorField<N>* field;
  SuspensionFlow flow;
  MappingTorusPoint base;

  double cached_theta[2] = {-1.0, -1.0};
  std::optional<typename GeneratorField<N>::Slice> cached_slice[2];
  int last = 0;

  Mat<N> operator()(double s) {
    const MappingTorusPoint p = suspend(flow, base, s);
    for (int k = 0; k < 2; ++k) {
      if (cached_slice[k] && cached_theta[k] == p.theta) {
        last = k;
        return cached_slice[k]->at(p.r);
      }
    }
    const int k = 1 - last;
    cached_theta[k] = p.theta;
    cached_slice[k] = field->slice(p.theta);
    last = k;
    return cached_slice[k]->at(p.r);
  }
};

template <int N>
void rk4_step(GeneratorSampler<N>& g, double s, double h, Mat<N>& w) {
  const Mat<N> k1 = g(s) * w;
  const Mat<N> k2 = g(s + 0.5 * h) * (w + 0.5 * h * k1).eval();
  const Mat<N> k3 = g(s + 0.5 * h) * (w + 0.5 * h * k2).eval();
  const Mat<N> k4 = g(s + h) * (w + h * k3).eval();
  w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/**
 * Fundamental solution Phi^t at a base point, for t a (positive or negative)
 * multiple of the integrator step.
 *
 * The integration runs on window propagators spanning renorm_interval steps:
 * each window starts from the identity, stays well conditioned, has its
 * determinant renormalized exactly, and is then multiplied into the result.
 * The assembled solution therefore carries unit determinant up to the
 * unavoidable multiplication rounding even over strongly hyperbolic
 * stretches, and the optional log records the measured window drift.
 */
template <int N>
[[nodiscard]] Mat<N> integrate(const ContinuousCocycle<N>& c, MappingTorusPoint p,
                               double t, DetDriftLog* log = nullptr) {
  c.integrator.validate();
  const double h = c.integrator.step;
  const double steps_real = t / h;
  const long long steps = std::llround(steps_real);
  if (std::abs(steps_real - static_cast<double>(steps)) >
      1e-9 * std::max(1.0, std::abs(steps_real))) {
    throw StepNotDividing("integrate: time " + std::to_string(t) +
                          " is not a multiple of the step " + std::to_string(h));
  }
  if (steps == 0) return Mat<N>::Identity();
  const double hs = steps > 0 ? h : -h;
  const long long count = steps > 0 ? steps : -steps;

  detail::GeneratorSampler<N> sampler{&c.generator, c.driving, p};
  Mat<N> phi = Mat<N>::Identity();
  Mat<N> window = Mat<N>::Identity();
  int in_window = 0;
  for (long long k = 0; k < count; ++k) {
    detail::rk4_step(sampler, static_cast<double>(k) * hs, hs, window);
    if (++in_window == c.integrator.renorm_interval || k + 1 == count) {
      if (det_measurable<N>(window)) {
        const double det = det_accurate<N>(window);
        if (!(det > 0.0)) {
          throw NonPositiveDeterminant("integrate: window determinant collapsed");
        }
        window = project_to_sl<N>(window);
        if (log) {
          log->max_window_error = std::max(log->max_window_error, std::abs(det - 1.0));
          log->accumulated_log += std::abs(std::log(det));
          log->residual_log += std::log(det_accurate<N>(window));
          ++log->windows;
        }
      }
      phi = (window * phi).eval();
      window = Mat<N>::Identity();
      in_window = 0;
    }
  }
  if (log && det_measurable<N>(phi)) {
    log->direct_det_error = std::abs(det_accurate<N>(phi) - 1.0);
  }
  return phi;
}

// =============================================================================
// Extension constructions
// =============================================================================

namespace detail {

template <int N>
[[nodiscard]] HomotopyPath<N> build_homotopy(const Loop<N>& loop) {
  if constexpr (N == 2) {
    return build_homotopy_sl2(loop);
  } else {
    return build_homotopy_sl3(loop);
  }
}

}  // namespace detail

/**
 * Natural extension of a discrete cocycle: a continuous-time cocycle over the
 * suspension flow of the same rotation whose integer-time values at the base
 * fiber reproduce the n-step maps. Exists precisely when the generator loop
 * is nullhomotopic; Herman's cocycle is the standard counterexample.
 */
template <int N>
[[nodiscard]] ContinuousCocycle<N> natural_extension(const DiscreteCocycle<N>& a,
                                                     IntegratorConfig config = {}) {
  config.validate();
  const Loop<N> loop = loop_of(a);
  if (!is_nullhomotopic(loop)) {
    throw NotNullhomotopic("natural_extension: generator loop of '" + a.family +
                           "' is not nullhomotopic; no natural extension exists");
  }
  GeneratorField<N> g = generator_from_homotopy(detail::build_homotopy<N>(loop));
  return {std::move(g), SuspensionFlow{a.driving}, config,
          std::make_shared<DiscreteCocycle<N>>(a)};
}

/**
 * Half-speed extension for SL(3): the doubled loop B_theta = A_{2 theta} over
 * rotation alpha/2 is the self-concatenation of A, hence trivial in
 * pi_1(SL(3)) = Z/2Z, and always extends. The result satisfies
 * Phi^n at (theta, 0) = A^n at 2 theta.
 */
[[nodiscard]] inline ContinuousCocycle<3> extend_half_speed(const DiscreteCocycle<3>& a,
                                                            IntegratorConfig config = {}) {
  const DiscreteCocycle<3> b = half_speed(a);
  if (!is_nullhomotopic(loop_of(b))) {
    throw NotNullhomotopic(
        "extend_half_speed: doubled loop classified nontrivial; this "
        "contradicts the Z/2 self-concatenation argument and indicates a "
        "classification failure");
  }
  return natural_extension(b, config);
}

/**
 * Continuous-time representation of an SL(2) cocycle: embed into SL(3) with a
 * neutral third dimension, then extend at half speed. The result acts as
 * (v, w) -> (A^n_{2 theta} v, w) at integer times on the base fiber.
 */
[[nodiscard]] inline ContinuousCocycle<3> extend_sl2_via_embedding(
    const DiscreteCocycle<2>& a, IntegratorConfig config = {}) {
  return extend_half_speed(block_embed(a), config);
}

// =============================================================================
// Extension verification
// =============================================================================

struct ExtensionReport {
  int n_max = 0;
  int grid = 0;
  std::vector<double> max_error;   // index n + n_max, Frobenius error over the grid
  std::vector<std::array<double, 3>> rows;  // (theta, n, error) when collected
  DetDriftLog det_log;
  double det_drift = 0.0;          // headline determinant drift measure
  double max_cocycle_residual = 0.0;
  double fidelity_tol = 1e-6;      // per unit time
  double det_tol = 1e-8;
  double cocycle_tol = 1e-6;

  [[nodiscard]] bool fidelity_ok() const {
    for (std::size_t i = 0; i < max_error.size(); ++i) {
      const int n = static_cast<int>(i) - n_max;
      const double bound = std::max(1, std::abs(n)) * fidelity_tol;
      if (max_error[i] > bound) return false;
    }
    return true;
  }
  [[nodiscard]] bool det_ok() const { return det_drift <= det_tol; }
  [[nodiscard]] bool cocycle_ok() const { return max_cocycle_residual <= cocycle_tol; }
  [[nodiscard]] bool pass() const { return fidelity_ok() && det_ok() && cocycle_ok(); }
};

/**
 * Compare integrated integer-time values of the extension against the n-step
 * maps of the discrete contract cocycle on a theta-grid, and report
 * determinant drift and cocycle-property residuals.
 */
/// Integer-time fidelity errors at one base angle: error(n) for
/// n in {-n_max, ..., n_max}, indexed by n + n_max, plus determinant logging.
template <int N>
[[nodiscard]] std::vector<double> verify_extension_at(const ContinuousCocycle<N>& c,
                                                      const DiscreteCocycle<N>& contract,
                                                      int n_max, double theta,
                                                      DetDriftLog* det_log = nullptr) {
  std::vector<double> errors(2 * n_max + 1, 0.0);
  // forward sweep: Phi^{n+1} = (unit step at flow^n) * Phi^n
  Mat<N> phi = Mat<N>::Identity();
  for (int n = 0; n <= n_max; ++n) {
    errors[n + n_max] = (phi - n_step(contract, theta, n)).norm();
    if (n < n_max) {
      const Mat<N> unit =
          integrate(c, suspend(c.driving, {theta, 0.0}, n), 1.0, det_log);
      phi = (unit * phi).eval();
    }
  }
  // backward sweep: Phi^{n} = (unit step at flow^{n})^{-1} * Phi^{n+1}
  phi = Mat<N>::Identity();
  for (int n = -1; n >= -n_max; --n) {
    const Mat<N> unit =
        integrate(c, suspend(c.driving, {theta, 0.0}, n), 1.0, det_log);
    phi = (sl_inverse<N>(unit) * phi).eval();
    errors[n + n_max] = (phi - n_step(contract, theta, n)).norm();
  }
  return errors;
}

/// Integrated cocycle-property spot checks at seeded base points.
template <int N>
[[nodiscard]] double cocycle_property_residual(const ContinuousCocycle<N>& c,
                                               int samples = 8,
                                               std::uint64_t seed = 41) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const MappingTorusPoint p{rng.uniform(), 0.0};
    const double s = std::floor(rng.uniform(-3.0, 3.0));
    const double t = std::floor(rng.uniform(-3.0, 3.0));
    const Mat<N> lhs = integrate(c, p, s + t);
    const Mat<N> rhs = integrate(c, suspend(c.driving, p, s), t) * integrate(c, p, s);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

template <int N>
[[nodiscard]] ExtensionReport verify_extension(const ContinuousCocycle<N>& c,
                                               const DiscreteCocycle<N>& contract,
                                               int n_max, int grid,
                                               bool collect_rows = false) {
  ExtensionReport report;
  report.n_max = n_max;
  report.grid = grid;
  report.max_error.assign(2 * n_max + 1, 0.0);

  for (int i = 0; i < grid; ++i) {
    const double theta = static_cast<double>(i) / grid;
    const std::vector<double> errors =
        verify_extension_at(c, contract, n_max, theta, &report.det_log);
    for (int n = -n_max; n <= n_max; ++n) {
      report.max_error[n + n_max] = std::max(report.max_error[n + n_max], errors[n + n_max]);
      if (collect_rows) {
        report.rows.push_back({theta, static_cast<double>(n), errors[n + n_max]});
      }
    }
  }
  report.det_drift = std::max(report.det_log.max_window_error,
                              report.det_log.direct_det_error > 0.0
                                  ? report.det_log.direct_det_error
                                  : 0.0);
  report.max_cocycle_residual = cocycle_property_residual(c);
  return report;
}

}  // namespace cocycle

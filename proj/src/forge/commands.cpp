#include "forge/commands.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>

#include "cocycle/extension.hpp"
#include "cocycle/homotopy.hpp"
#include "cocycle/spectral.hpp"
#include "forge/output.hpp"
#include "forge/parallel.hpp"

namespace cocycle::forge {

namespace {

/// Collects emitted files and finalizes the run record.
struct RunContext {
  std::filesystem::path dir;
  std::vector<std::string> files;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  explicit RunContext(const RunConfig& config) : dir(resolve_out_dir(config)) {
    std::filesystem::create_directories(dir);
  }

  void csv(const std::string& name, const CsvTable& table) {
    write_csv(dir / name, table);
    files.push_back(name);
  }

  void json(const std::string& name, const OrderedJson& value) {
    write_json(dir / name, value);
    files.push_back(name);
  }

  void finalize(const RunConfig& config) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    OrderedJson record;
    record["version"] = kVersion;
    record["config"] = config.to_json();
    record["wall_ms"] = elapsed.count();
    record["outputs"] = build_manifest(dir, files);
    write_json(dir / "run_record.json", record);
  }
};

struct Classification {
  int dim = 2;
  int winding = 0;          // SL(2)
  bool trivial_class = false;  // SL(3)
  bool nullhomotopic = false;
};

Classification classify(const AnyCocycle& c) {
  Classification out;
  out.dim = c.dim();
  if (c.two) {
    out.winding = winding_number(loop_of(*c.two));
    out.nullhomotopic = out.winding == 0;
  } else {
    out.trivial_class = is_nullhomotopic(loop_of(*c.three));
    out.nullhomotopic = out.trivial_class;
  }
  return out;
}

double herman_lower_bound(double lambda) {
  return std::log(0.5 * (lambda + 1.0 / lambda));
}

}  // namespace

// =============================================================================
// classify
// =============================================================================

int cmd_classify(const RunConfig& config) {
  RunContext ctx(config);
  const AnyCocycle cocycle = make_cocycle(config);
  const Classification cls = classify(cocycle);

  OrderedJson report;
  report["cocycle"] = config.cocycle;
  report["dim"] = cls.dim;
  report["alpha"] = config.alpha().describe();
  if (cls.dim == 2) {
    report["winding"] = cls.winding;
    report["convention"] = config.convention;
    std::printf("winding=%+d, nullhomotopic=%s\n", cls.winding,
                cls.nullhomotopic ? "true" : "false");
  } else {
    report["z2_class"] = cls.trivial_class ? "trivial" : "nontrivial";
    std::printf("class=%s, nullhomotopic=%s\n",
                cls.trivial_class ? "trivial" : "nontrivial",
                cls.nullhomotopic ? "true" : "false");
  }
  report["nullhomotopic"] = cls.nullhomotopic;
  ctx.json("classify_report.json", report);
  ctx.finalize(config);
  return 0;
}

// =============================================================================
// extend
// =============================================================================

namespace {

template <int N>
int run_extension(const RunConfig& config, RunContext& ctx,
                  const ContinuousCocycle<N>& cont, const DiscreteCocycle<N>& contract,
                  OrderedJson& report) {
  const int n_max = config.n_max;
  const int grid = config.grid;

  std::vector<std::vector<double>> per_theta(grid);
  std::vector<DetDriftLog> logs(grid);
  parallel_for(grid, config.threads, [&](int i) {
    per_theta[i] = verify_extension_at(cont, contract, n_max,
                                       static_cast<double>(i) / grid, &logs[i]);
  });

  ExtensionReport merged;
  merged.n_max = n_max;
  merged.grid = grid;
  merged.max_error.assign(2 * n_max + 1, 0.0);
  CsvTable residuals;
  residuals.header = {"theta", "n", "error"};
  for (int i = 0; i < grid; ++i) {
    const double theta = static_cast<double>(i) / grid;
    for (int n = -n_max; n <= n_max; ++n) {
      const double err = per_theta[i][n + n_max];
      merged.max_error[n + n_max] = std::max(merged.max_error[n + n_max], err);
      residuals.rows.push_back({theta, static_cast<double>(n), err});
    }
    merged.det_log.max_window_error =
        std::max(merged.det_log.max_window_error, logs[i].max_window_error);
    merged.det_log.accumulated_log += logs[i].accumulated_log;
    merged.det_log.windows += logs[i].windows;
    merged.det_log.direct_det_error =
        std::max(merged.det_log.direct_det_error, logs[i].direct_det_error);
  }
  merged.det_drift = std::max(merged.det_log.max_window_error,
                              std::max(0.0, merged.det_log.direct_det_error));
  merged.max_cocycle_residual = cocycle_property_residual(cont);

  ctx.csv("extension_residuals.csv", residuals);

  OrderedJson errors = OrderedJson::array();
  for (int n = -n_max; n <= n_max; ++n) {
    OrderedJson e;
    e["n"] = n;
    e["max_error"] = merged.max_error[n + n_max];
    e["bound"] = std::max(1, std::abs(n)) * merged.fidelity_tol;
    errors.push_back(e);
  }
  report["fidelity"] = errors;
  report["fidelity_ok"] = merged.fidelity_ok();
  report["det_drift"] = merged.det_drift;
  report["det_windows"] = merged.det_log.windows;
  report["det_ok"] = merged.det_ok();
  report["cocycle_residual"] = merged.max_cocycle_residual;
  report["cocycle_ok"] = merged.cocycle_ok();
  report["pass"] = merged.pass();
  std::printf("extension verified: fidelity=%s det=%s cocycle=%s\n",
              merged.fidelity_ok() ? "ok" : "FAIL", merged.det_ok() ? "ok" : "FAIL",
              merged.cocycle_ok() ? "ok" : "FAIL");
  return merged.pass() ? 0 : 3;
}

}  // namespace

int cmd_extend(const RunConfig& config) {
  RunContext ctx(config);
  const AnyCocycle cocycle = make_cocycle(config);
  IntegratorConfig icfg;
  icfg.step = config.step;
  icfg.validate();

  OrderedJson report;
  report["cocycle"] = config.cocycle;
  report["alpha"] = config.alpha().describe();
  report["step"] = config.step;

  int exit_code = 0;
  if (cocycle.two && config.embed) {
    report["route"] = "embed-into-sl3-then-half-speed";
    const ContinuousCocycle<3> cont = extend_sl2_via_embedding(*cocycle.two, icfg);
    exit_code = run_extension<3>(config, ctx, cont, *cont.time1, report);
  } else if (cocycle.two) {
    report["route"] = "natural";
    const ContinuousCocycle<2> cont = natural_extension(*cocycle.two, icfg);
    exit_code = run_extension<2>(config, ctx, cont, *cocycle.two, report);
  } else {
    report["route"] = "natural";
    const ContinuousCocycle<3> cont = natural_extension(*cocycle.three, icfg);
    exit_code = run_extension<3>(config, ctx, cont, *cocycle.three, report);
  }
  ctx.json("extension_report.json", report);
  ctx.finalize(config);
  return exit_code;
}

// =============================================================================
// lyapunov
// =============================================================================

int cmd_lyapunov(const RunConfig& config) {
  RunContext ctx(config);
  const AnyCocycle cocycle = make_cocycle(config);
  const long long steps = config.n;
  const int bases = std::clamp(config.grid, 1, 64);

  SplitMix64 rng(config.seed);
  std::vector<double> thetas(bases);
  for (double& t : thetas) t = rng.uniform();

  std::vector<LyapunovReport> reports(bases);
  parallel_for(bases, config.threads, [&](int i) {
    if (cocycle.two) {
      reports[i] = lyapunov_spectrum(*cocycle.two, thetas[i], steps);
    } else {
      reports[i] = lyapunov_spectrum(*cocycle.three, thetas[i], steps);
    }
  });

  CsvTable series;
  series.header = {"base_theta", "exponent_index", "n", "value"};
  for (int i = 0; i < bases; ++i) {
    for (std::size_t e = 0; e < reports[i].series.size(); ++e) {
      const ConvergenceSeries& s = reports[i].series[e];
      for (std::size_t k = 0; k < s.n.size(); ++k) {
        series.rows.push_back({thetas[i], static_cast<double>(e),
                               static_cast<double>(s.n[k]), s.value[k]});
      }
    }
  }
  ctx.csv("lyapunov_series.csv", series);

  OrderedJson summary;
  summary["cocycle"] = config.cocycle;
  summary["alpha"] = config.alpha().describe();
  summary["steps"] = steps;
  OrderedJson per_base = OrderedJson::array();
  double worst_sum = 0.0;
  double min_top = std::numeric_limits<double>::infinity();
  double worst_middle = 0.0;
  for (int i = 0; i < bases; ++i) {
    OrderedJson b;
    b["theta"] = thetas[i];
    b["exponents"] = reports[i].exponents;
    b["sum"] = reports[i].sum();
    b["tail_delta"] = reports[i].tail_delta;
    per_base.push_back(b);
    worst_sum = std::max(worst_sum, std::abs(reports[i].sum()));
    min_top = std::min(min_top, reports[i].exponents.front());
    if (reports[i].exponents.size() == 3) {
      worst_middle = std::max(worst_middle, std::abs(reports[i].exponents[1]));
    }
  }
  summary["bases"] = per_base;
  summary["max_abs_sum"] = worst_sum;

  bool ok = worst_sum <= 1e-3;
  if (config.cocycle == "herman" || config.cocycle == "herman-doubled" ||
      config.cocycle == "herman-embedded-halfspeed") {
    const double bound = herman_lower_bound(config.lambda) - 0.01;
    summary["herman_bound"] = bound;
    summary["min_top_exponent"] = min_top;
    ok = ok && min_top >= bound;
  }
  if (cocycle.three) {
    summary["max_abs_middle_exponent"] = worst_middle;
    ok = ok && worst_middle <= 1e-3;
  }
  summary["pass"] = ok;
  ctx.json("lyapunov_summary.json", summary);

  if (config.svg && !reports.empty()) {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < reports[0].series[0].n.size(); ++k) {
      xs.push_back(static_cast<double>(reports[0].series[0].n[k]));
      ys.push_back(reports[0].series[0].value[k]);
    }
    write_svg_line_chart(ctx.dir / "lyapunov_top_exponent.svg",
                         "top exponent convergence", xs, ys);
    ctx.files.push_back("lyapunov_top_exponent.svg");
  }

  std::printf("lyapunov: top=%.6f max|sum|=%.3g %s\n", min_top, worst_sum,
              ok ? "ok" : "FAIL");
  ctx.finalize(config);
  return ok ? 0 : 3;
}

// =============================================================================
// projective-orbit
// =============================================================================

int cmd_projective_orbit(const RunConfig& config) {
  RunContext ctx(config);
  const AnyCocycle cocycle = make_cocycle(config);
  if (!cocycle.two) {
    throw ConfigError("projective-orbit requires an SL(2) cocycle");
  }
  SplitMix64 rng(config.seed);
  const ProjectivePoint start{rng.uniform(), Vec2::UnitX()};
  const int bins = 100;
  const OccupancyGrid grid =
      projective_orbit_occupancy(*cocycle.two, start, config.n, bins);

  CsvTable occupancy;
  occupancy.header = {"theta_bin", "angle_bin", "count"};
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      occupancy.rows.push_back({static_cast<double>(i), static_cast<double>(j),
                                static_cast<double>(grid.counts[i * bins + j])});
    }
  }
  ctx.csv("occupancy.csv", occupancy);

  OrderedJson summary;
  summary["cocycle"] = config.cocycle;
  summary["steps"] = grid.steps;
  summary["bins"] = bins;
  summary["start_theta"] = start.theta;
  summary["coverage"] = grid.coverage();
  ctx.json("orbit_summary.json", summary);

  if (config.svg) {
    write_svg_heatmap(ctx.dir / "occupancy.svg", "projective orbit occupancy",
                      grid.counts, bins);
    ctx.files.push_back("occupancy.svg");
  }
  std::printf("projective orbit: coverage=%.4f over %d x %d cells\n", grid.coverage(),
              bins, bins);
  ctx.finalize(config);
  return 0;
}

// =============================================================================
// herman-demo
// =============================================================================

namespace {

struct DemoStage {
  std::string name;
  bool gated = true;
  bool pass = false;
  OrderedJson details;
};

}  // namespace

int cmd_herman_demo(const RunConfig& config) {
  RunContext ctx(config);
  const CircleRotation alpha = config.alpha();
  const HermanConvention convention = config.convention == "cw"
                                          ? HermanConvention::Clockwise
                                          : HermanConvention::CounterClockwise;
  const DiscreteCocycle<2> herman = herman_cocycle(config.lambda, alpha, convention);
  // Oseledets directions are resolved by the estimators only for hyperbolic
  // stretches over irrational driving; outside that regime the direction
  // stages are reported but not gated
  const bool hyperbolic = std::abs(config.lambda - 1.0) > 1e-12;
  const bool resolves_directions = hyperbolic && !alpha.rational;
  std::vector<DemoStage> stages;

  // 1-3: homotopy classes along the embedding pipeline
  {
    DemoStage s{.name = "classify-herman"};
    const int w = winding_number(loop_of(herman));
    s.pass = std::abs(w) == 1;
    s.details["winding"] = w;
    stages.push_back(s);
  }
  {
    DemoStage s{.name = "classify-doubled"};
    const int w = winding_number(loop_of(half_speed(herman)));
    s.pass = std::abs(w) == 2;
    s.details["winding"] = w;
    stages.push_back(s);
  }
  const DiscreteCocycle<3> embedded = block_embed(half_speed(herman));
  {
    DemoStage s{.name = "classify-embedded"};
    s.pass = is_nullhomotopic(loop_of(embedded));
    s.details["z2_class"] = s.pass ? "trivial" : "nontrivial";
    stages.push_back(s);
  }

  // 4: the direct extension is obstructed
  {
    DemoStage s{.name = "direct-extension-obstructed"};
    try {
      (void)natural_extension(herman);
      s.pass = false;
      s.details["note"] = "unexpectedly extended a winding-1 loop";
    } catch (const NotNullhomotopic& e) {
      s.pass = true;
      s.details["obstruction"] = e.what();
    }
    stages.push_back(s);
  }

  // 5: embedded extension and its verification
  IntegratorConfig icfg;
  icfg.step = config.step;
  const ContinuousCocycle<3> extension = extend_sl2_via_embedding(herman, icfg);
  {
    DemoStage s{.name = "extension-fidelity"};
    const int grid = std::min(config.grid, 64);
    const int n_max = std::min(config.n_max, 5);
    std::vector<std::vector<double>> per_theta(grid);
    std::vector<DetDriftLog> logs(grid);
    parallel_for(grid, config.threads, [&](int i) {
      per_theta[i] = verify_extension_at(extension, *extension.time1, n_max,
                                         static_cast<double>(i) / grid, &logs[i]);
    });
    CsvTable residuals;
    residuals.header = {"theta", "n", "error"};
    bool ok = true;
    double det_drift = 0.0;
    for (int i = 0; i < grid; ++i) {
      for (int n = -n_max; n <= n_max; ++n) {
        const double err = per_theta[i][n + n_max];
        residuals.rows.push_back(
            {static_cast<double>(i) / grid, static_cast<double>(n), err});
        ok = ok && err <= std::max(1, std::abs(n)) * 1e-6;
      }
      det_drift = std::max(det_drift, logs[i].max_window_error);
    }
    ctx.csv("extension_residuals.csv", residuals);
    s.pass = ok && det_drift <= 1e-8;
    s.details["det_window_drift"] = det_drift;
    stages.push_back(s);
  }

  // 6: spectrum transfer
  {
    DemoStage s{.name = "spectrum-transfer"};
    const SpectrumCompareReport cmp = extension_spectrum_compare(
        herman, extension, std::min(config.grid, 32), std::min<long long>(config.n, 10000));
    s.pass = cmp.pass();
    s.details["max_product_discrepancy"] = cmp.max_product_discrepancy;
    s.details["max_integrated_discrepancy"] = cmp.max_integrated_discrepancy;
    stages.push_back(s);
  }

  // 7: Herman spectrum; the lower bound presumes irrational driving
  {
    DemoStage s{.name = "herman-spectrum"};
    const long long steps = std::min<long long>(config.n, 100000);
    const LyapunovReport rep = lyapunov_spectrum(herman, 0.3, steps);
    const double bound = herman_lower_bound(config.lambda) - 0.01;
    s.pass = std::abs(rep.sum()) <= 1e-3 &&
             (alpha.rational || rep.exponents[0] >= bound);
    s.details["exponents"] = rep.exponents;
    s.details["bound"] = bound;
    s.details["bound_applies"] = !alpha.rational;
    stages.push_back(s);
  }
  if (alpha.rational) {
    DemoStage s{.name = "rational-periodicity"};
    const long long q = alpha.q;
    const Mat2 period = n_step(herman, 0.3, q);
    const Mat2 doubled = n_step(herman, 0.3, 2 * q);
    s.pass = (doubled - period * period).norm() == 0.0;  // exact residue arithmetic
    s.details["period"] = q;
    stages.push_back(s);
  }

  // 8: SL(3) spectrum structure of the extension
  {
    DemoStage s{.name = "sl3-spectrum"};
    const long long steps = std::min<long long>(config.n, 10000);
    const LyapunovReport rep = lyapunov_spectrum(extension, {0.3, 0.0}, steps);
    const Vec3 neutral_axis = Vec3::UnitZ();
    const double neutral_rate =
        vector_exponent(extension, {0.3, 0.0}, neutral_axis, steps).last();
    s.pass = std::abs(rep.exponents[1]) <= 1e-3 && std::abs(neutral_rate) <= 1e-3;
    s.details["middle_exponent"] = rep.exponents[1];
    s.details["neutral_vector_exponent"] = neutral_rate;
    try {
      const DirectionField<3> field = oseledets_directions(extension, 16, steps);
      double worst_e0 = 0.0;
      for (const Vec3& e0 : field.neutral) {
        worst_e0 = std::max(worst_e0, (e0 - Vec3::UnitZ()).norm());
      }
      s.details["max_e0_error"] = worst_e0;
      if (resolves_directions) s.pass = s.pass && worst_e0 <= 1e-6;
    } catch (const DegenerateSpectrum& e) {
      s.details["directions"] = e.what();
      if (resolves_directions) s.pass = false;
    }
    stages.push_back(s);
  }

  // 9: Oseledets invariance
  {
    DemoStage s{.name = "oseledets-invariance", .gated = resolves_directions};
    const double residual = oseledets_invariance_residual(herman, 16, 10000);
    s.pass = residual <= 1e-4;
    s.details["max_angle_residual"] = residual;
    s.details["directions_resolved"] = resolves_directions;
    stages.push_back(s);
  }

  // 10: projective occupancy (diagnostic; strong hyperbolicity glues the
  // orbit to the unstable graph and slows the sweep)
  {
    DemoStage s{.name = "projective-occupancy", .gated = false};
    const OccupancyGrid grid = projective_orbit_occupancy(
        herman, {0.1, Vec2::UnitX()}, std::min<long long>(config.n, 1000000), 100);
    s.pass = true;
    s.details["coverage"] = grid.coverage();
    CsvTable occupancy;
    occupancy.header = {"theta_bin", "angle_bin", "count"};
    for (int i = 0; i < 100; ++i) {
      for (int j = 0; j < 100; ++j) {
        occupancy.rows.push_back({static_cast<double>(i), static_cast<double>(j),
                                  static_cast<double>(grid.counts[i * 100 + j])});
      }
    }
    ctx.csv("occupancy.csv", occupancy);
    if (config.svg) {
      write_svg_heatmap(ctx.dir / "occupancy.svg", "projective orbit occupancy",
                        grid.counts, 100);
      ctx.files.push_back("occupancy.svg");
    }
    stages.push_back(s);
  }

  // 11: splitting-oscillation diagnostic (non-decaying variation under
  // refinement is the numerical signature of a discontinuous splitting)
  {
    DemoStage s{.name = "oseledets-oscillation-diagnostic", .gated = false};
    const auto osc =
        oseledets_oscillation(herman, {1 << 10, 1 << 12, 1 << 14, 1 << 16}, 2000);
    CsvTable table;
    table.header = {"resolution", "max_adjacent_angle"};
    OrderedJson list = OrderedJson::array();
    for (const auto& [res, variation] : osc) {
      table.rows.push_back({static_cast<double>(res), variation});
      OrderedJson e;
      e["resolution"] = res;
      e["max_adjacent_angle"] = variation;
      list.push_back(e);
    }
    ctx.csv("oseledets_oscillation.csv", table);
    s.pass = true;
    s.details["per_resolution"] = list;
    stages.push_back(s);
  }

  // 12: growth-rate window diagnostic (a persistent spread is consistent
  // with non-existence of the norm-growth limit at this base point)
  {
    DemoStage s{.name = "fk-window-diagnostic", .gated = false};
    const auto windows =
        fk_gap_diagnostic(herman, 0.3, std::min<long long>(config.n, 65536));
    CsvTable table;
    table.header = {"window_from", "window_to", "min_value", "max_value"};
    for (const auto& w : windows) {
      table.rows.push_back({static_cast<double>(w.from), static_cast<double>(w.to),
                            w.min_value, w.max_value});
    }
    ctx.csv("fk_windows.csv", table);
    s.pass = true;
    if (!windows.empty()) {
      s.details["last_window_spread"] =
          windows.back().max_value - windows.back().min_value;
    }
    stages.push_back(s);
  }

  OrderedJson summary;
  summary["lambda"] = config.lambda;
  summary["alpha"] = alpha.describe();
  OrderedJson stage_list = OrderedJson::array();
  bool all_ok = true;
  for (const DemoStage& s : stages) {
    OrderedJson e;
    e["stage"] = s.name;
    e["gated"] = s.gated;
    e["pass"] = s.pass;
    e["details"] = s.details;
    stage_list.push_back(e);
    if (s.gated) all_ok = all_ok && s.pass;
    std::printf("[%s] %s\n", s.gated ? (s.pass ? "PASS" : "FAIL") : "info",
                s.name.c_str());
  }
  summary["stages"] = stage_list;
  summary["pass"] = all_ok;
  ctx.json("demo_summary.json", summary);
  ctx.finalize(config);
  return all_ok ? 0 : 3;
}

// =============================================================================
// dispatch
// =============================================================================

int run_command(const RunConfig& config) {
  try {
    if (config.command == "classify") return cmd_classify(config);
    if (config.command == "extend") return cmd_extend(config);
    if (config.command == "lyapunov") return cmd_lyapunov(config);
    if (config.command == "projective-orbit") return cmd_projective_orbit(config);
    if (config.command == "herman-demo") return cmd_herman_demo(config);
    throw ConfigError("unknown command '" + config.command + "'");
  } catch (const NotNullhomotopic& e) {
    std::cerr << "obstruction: " << e.what() << '\n'
              << "a natural extension exists precisely when the generator loop "
                 "is nullhomotopic\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace cocycle::forge

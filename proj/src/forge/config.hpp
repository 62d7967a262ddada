#pragma once

#include <string>

#include "cocycle/discrete.hpp"
#include "cocycle/driving.hpp"
#include "forge/output.hpp"

namespace cocycle::forge {

inline constexpr const char* kVersion = "cocycle-forge 1.0.0";

/// Resolved run configuration: every stochastic or numerical choice a command
/// makes is pinned here, so identical configs reproduce identical outputs.
struct RunConfig {
  std::string command;
  std::string cocycle = "herman";
  double lambda = 2.0;
  int winding_k = 1;
  double sine_c = 0.5;
  int dim = 2;  // identity / constant-diag families
  std::string alpha_spec = "golden";
  std::string convention = "ccw";
  bool embed = false;
  long long n = 100000;
  int grid = 64;
  int n_max = 5;
  double step = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  bool svg = false;
  std::string out_dir;  // empty: $COCYCLE_FORGE_OUT or ./out

  bool alpha_float_warning = false;  // set when a decimal alpha was given

  [[nodiscard]] CircleRotation alpha() const;
  [[nodiscard]] OrderedJson to_json() const;
};

/// Parse "p/q" (exact rational), "golden", or a decimal literal (tagged
/// irrational, with a warning that a float constant is effectively rational).
CircleRotation parse_alpha(const std::string& spec, bool* float_warning = nullptr);

/// Wrapper tying together the two supported dimensions.
struct AnyCocycle {
  std::optional<DiscreteCocycle<2>> two;
  std::optional<DiscreteCocycle<3>> three;

  [[nodiscard]] int dim() const { return two ? 2 : 3; }
};

/// Build the named generator family from a config. Throws ConfigError for
/// unknown names or invalid parameters.
AnyCocycle make_cocycle(const RunConfig& config);

/// Output directory resolution: --out flag, then COCYCLE_FORGE_OUT, then ./out.
std::filesystem::path resolve_out_dir(const RunConfig& config);

}  // namespace cocycle::forge

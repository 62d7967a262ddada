#pragma once

#include "forge/config.hpp"

namespace cocycle::forge {

int cmd_classify(const RunConfig& config);
int cmd_extend(const RunConfig& config);
int cmd_lyapunov(const RunConfig& config);
int cmd_projective_orbit(const RunConfig& config);
int cmd_herman_demo(const RunConfig& config);

/// Dispatch on config.command, map library errors onto the exit-code
/// contract (0 success, 2 obstruction, 3 numerical failure, 4 config error),
/// and persist the run record.
int run_command(const RunConfig& config);

}  // namespace cocycle::forge

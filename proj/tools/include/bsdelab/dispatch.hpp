#pragma once

#include "bsdelab/config.hpp"

namespace bsdelab {

// Exit statuses of the tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;

/// Runs the configured subcommand, writing all reports plus the effective
/// config into cfg.out_dir. Returns kExitOk or kExitCheckFailed; configuration
/// and numerical failures are reported via the exit code after printing the
/// reason to stderr.
int dispatch(const RunConfig& cfg);

} // namespace bsdelab

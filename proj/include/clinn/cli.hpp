#pragma once

// Command-line front end: train, eval, indicate, shocks, compare and matrix.
// Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
// 1 anything else (I/O).

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "clinn/config.hpp"
#include "clinn/evalreport.hpp"

namespace clinn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct TrainOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::optional<evalreport::MetricsRecord> metrics;
};

/// Trains `cfg` and writes config.json, checkpoint.bin (best model),
/// history.csv, timing.csv and metrics.json into cfg.out. On divergence the
/// partial history is still written and exit_code is kExitNumerical.
TrainOutcome train_to_dir(const RunConfig& cfg, std::ostream& log);

/// Parses args (args[0] is the program name) and runs one subcommand.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace clinn::cli

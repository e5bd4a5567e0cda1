#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlxa/config.hpp"
#include "rlxa/verify.hpp"

namespace rlxa {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };
/// Reads RLXA_LOG (error, warn, info, debug); defaults to warn.
LogLevel log_level_from_env();
void set_log_level(LogLevel level);
void log(LogLevel level, const std::string& msg);

struct RunContext {
  std::string out;                     // empty: use the config's `out`
  int jobs = 1;
  std::optional<std::uint64_t> seed;   // overrides the config seed
};

struct CommandResult {
  int exit_code = 0;
  std::string summary;                 // one line for standard output
  std::vector<std::string> files;      // paths written
};

/// One trajectory from seed 0 (parabolic when eps = 0). Writes
/// trajectory.rlxa, steps.csv and hyperbolic.csv or parabolic.csv.
CommandResult cmd_solve(const ExperimentConfig& cfg, const RunContext& ctx);
/// Poincaré constant with a dense cross-check. Writes eigen.txt.
CommandResult cmd_eigen(const ExperimentConfig& cfg, const RunContext& ctx);
/// Z/K splitting from seed 0. Writes split.csv, split_steps.csv, split.rlxa
/// and, with `difference = true`, difference.csv for seeds 0 and 1.
CommandResult cmd_split(const ExperimentConfig& cfg, const RunContext& ctx);
/// Semicontinuity sweep over eps_grid. Writes limit.csv.
CommandResult cmd_limit(const ExperimentConfig& cfg, const RunContext& ctx);
/// Certifies ledgers found in the given files or directories. Writes
/// report.txt and report.csv; exit code 1 iff an entry is violated.
CommandResult cmd_verify(const std::vector<std::string>& paths, const RunContext& ctx);

/// Ledgers by name from csv files (name = file stem) or directories.
std::map<std::string, EnergyLedger> load_ledgers(const std::vector<std::string>& paths);

}  // namespace rlxa

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace quadchase::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Steady-state bound for sim1 and the outside-reversal bound for sim2 (m).
inline constexpr double kSim1SteadyStateBound = 0.25;
inline constexpr double kSim2OutsideReversalBound = 0.30;

struct CommandOptions {
  std::optional<std::string> config_path;  ///< defaults when absent
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;      ///< overrides the configured seed
  std::string suite;                      ///< empty selects the command default
};

/**
 * Runs one scenario ("sim1", "sim2" or "config" for the configured one,
 * default "config") and writes log.csv, log.json, telemetry.csv,
 * prediction.csv, metrics.json and config.json into out_dir. Returns 1 on a
 * controller fault or a missed tracking bound, 2 on configuration or I/O
 * errors.
 */
int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Verification suites (default "all"); writes verify.json. Returns 1 when
/// any check fails.
int cmd_verify(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// (sigma, delay) grid; writes sweep.csv and sweep.json. Returns 1 when a
/// delay column is not non-decreasing in sigma. A seed option replaces the
/// seed list with that single seed.
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace quadchase::tools

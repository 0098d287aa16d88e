#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadchase_tools/config.hpp"

namespace quadchase::tools {

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
};

/// The three sufficient conditions for terminal-set invariance, with the
/// displacement intervals as witnesses.
CheckResult check_conditions(const RunConfig& config);

/**
 * States drawn uniformly from the terminal set at the origin are stepped
 * under the terminal controller while the vehicle makes one admissible
 * move; each successor must lie in the terminal set at the new vehicle
 * position. A state where the controller does not exist counts as a
 * violation.
 */
CheckResult check_terminal_invariance(const RunConfig& config, int samples,
                                      std::uint64_t seed);

/**
 * Closed-loop runs from starts sampled in the conservative feasible-start
 * set, chasing a random-walk evader: every solve must be optimal with
 * max_slack <= 1e-6.
 */
CheckResult check_recursive_feasibility(const RunConfig& config, int runs, double duration,
                                        std::uint64_t seed);

/// Admissible evader rollouts never leave the ball V_bar N dt about any of
/// their own positions within N steps.
CheckResult check_vehicle_ball(const RunConfig& config, int rollouts, int steps,
                               std::uint64_t seed);

/**
 * Random vehicle states and bounds: the predicted sector is midpoint-convex
 * on sampled pairs, contains its Chebyshev center and lies in the terminal
 * ball.
 */
CheckResult check_prediction_sets(const RunConfig& config, int sectors, std::uint64_t seed);

/// Suites by name: "all", "conditions", "invariance", "feasibility",
/// "vehicle_ball", "prediction". Throws ConfigError for an unknown name.
std::vector<CheckResult> run_verify(const RunConfig& config, const std::string& suite);

nlohmann::json verify_report(const std::vector<CheckResult>& checks);

struct SweepCell {
  double sigma = 0.0;
  int delay = 0;
  std::vector<double> steady_state;  ///< one per run (seeds, then twins)
  int faults = 0;
  double mean() const;
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< delay-major, sigma-minor
  /// Per delay: mean steady-state error non-decreasing in sigma.
  std::vector<std::pair<int, bool>> monotone;
  bool all_monotone() const;
};

/// Paired-seed grid over (sigma, delay) of the configured scenario.
SweepResult run_sweep(const RunConfig& config);

void write_sweep_csv(std::ostream& os, const SweepResult& result);
nlohmann::json sweep_json(const SweepResult& result);

}  // namespace quadchase::tools

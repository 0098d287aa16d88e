#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadchase/mpc.hpp"
#include "quadchase/simulator.hpp"

namespace quadchase::tools {

/// Raised for malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  std::vector<double> sigmas = {0.0, 0.01, 0.02, 0.05};
  std::vector<int> delays = {0, 2};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  /// Pair every seed with its antithetic twin (negated noise draws).
  bool antithetic = true;
};

struct VerifyConfig {
  int invariance_samples = 1000;
  int feasibility_runs = 100;
  double feasibility_duration = 10.0;
  int ball_rollouts = 1000;
  int ball_steps = 200;
  int prediction_sectors = 1000;
  std::uint64_t seed = 42;
};

/// Everything a run needs. Every field has a default, so `{}` is a valid
/// configuration describing the circular-evader chase.
struct RunConfig {
  QuadParams params;
  MpcConfig mpc;
  ChaseSettings chase;
  ScenarioConfig scenario;
  SweepConfig sweep;
  VerifyConfig verify;

  /// Throws ConfigError when the parts disagree or break an invariant.
  void validate() const;
  Controller make_controller() const;
};

RunConfig default_run_config();

/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);

/// Scenario presets selected by --suite: "sim1" (circular evader, 60 s)
/// and "sim2" (random walk in the arena, 60 s).
ScenarioConfig preset_scenario(const std::string& suite, const ScenarioConfig& base);

}  // namespace quadchase::tools

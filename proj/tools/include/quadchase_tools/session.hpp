#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadchase/simulator.hpp"
#include "quadchase_tools/config.hpp"

namespace quadchase::tools {

struct SessionOptions {
  /// Incoming frames at or above this count within one window are dropped.
  int rate_limit = 100;
  /// Window length in loop periods (one second at 20 Hz).
  int rate_window = 20;
};

enum class SessionEventKind { kSteer, kReset };

/// A control input tagged with the simulation tick it takes effect on.
struct SessionEvent {
  std::uint64_t tick = 0;
  SessionEventKind kind = SessionEventKind::kSteer;
  SteeringCommand steering;  ///< kSteer only, already clamped
  std::optional<std::uint64_t> seed;  ///< kReset only
};

nlohmann::json recording_json(const std::vector<SessionEvent>& events);
/// Throws ConfigError on a malformed recording.
std::vector<SessionEvent> recording_from_json(const nlohmann::json& j);

/**
 * One live chase with a human-driven evader. Not thread-safe: the owner
 * serializes calls, and only advance() touches the simulation.
 *
 * Ticks are counted across resets. A message accepted while `tick()` is k
 * takes effect on tick k + 1, or on the later tick named by its optional
 * "tick" field (steer, reset and pause). Steering aimed at one tick is
 * last-write-wins. Resume is immediate. The simulation depends only on the
 * seed and the tagged events, so replay() reproduces every log of a session
 * exactly.
 */
class Session {
 public:
  explicit Session(const RunConfig& config, SessionOptions options = {},
                   bool start_paused = false);

  /// Validates one client frame and returns the ack or error frame. Invalid
  /// frames leave the session untouched.
  nlohmann::json accept(const std::string& text);

  /// One loop period. Runs a simulation tick and returns its state frame,
  /// or nullopt while paused. A controller fault pauses the session after
  /// its frame.
  std::optional<nlohmann::json> advance();

  bool paused() const { return paused_; }
  std::uint64_t tick() const { return tick_; }
  std::uint64_t periods() const { return periods_; }
  const std::vector<SessionEvent>& recording() const { return recording_; }
  /// Logs of every run segment (one more per reset), current last.
  std::vector<SimLog> logs() const;
  nlohmann::json summary() const;

  /// Per segment: run_<i>/log.csv, log.json, telemetry.csv, prediction.csv;
  /// plus recording.json.
  void write_logs(const std::filesystem::path& dir) const;

 private:
  nlohmann::json error_frame(const std::string& code, const std::string& message) const;
  void start_segment(std::uint64_t seed);

  RunConfig config_;
  SessionOptions options_;
  std::unique_ptr<Simulation> sim_;
  std::vector<SimLog> finished_;
  std::vector<SessionEvent> recording_;
  struct Scheduled {
    std::optional<SessionEvent> reset;
    std::optional<SteeringCommand> steer;
    bool pause = false;
  };
  std::map<std::uint64_t, Scheduled> schedule_;
  SteeringCommand requested_;
  std::deque<std::uint64_t> arrivals_;
  std::uint64_t tick_ = 0;
  std::uint64_t periods_ = 0;
  bool paused_ = false;
};

/// Scenario a session runs: the configured one with an external evader at
/// rest at its start position.
ScenarioConfig session_scenario(const RunConfig& config);

/// Re-runs `ticks` simulation ticks driven by a recording, without a clock.
std::vector<SimLog> replay(const RunConfig& config, const std::vector<SessionEvent>& events,
                           std::uint64_t ticks);

}  // namespace quadchase::tools

#include "quadchase_tools/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadchase_tools/io.hpp"

namespace quadchase::tools {

using nlohmann::json;

namespace {

double finite_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("field '") + key + "' must be finite");
  return v;
}

void only_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unexpected field '" + key + "'");
    }
  }
}

json steering_json(const SteeringCommand& s) {
  return {{"speed", s.speed}, {"heading_rate", s.heading_rate}};
}

Simulation make_simulation(const RunConfig& config, std::uint64_t seed) {
  ScenarioConfig s = session_scenario(config);
  s.seed = seed;
  return Simulation(s, config.make_controller());
}

}  // namespace

json recording_json(const std::vector<SessionEvent>& events) {
  json list = json::array();
  for (const SessionEvent& e : events) {
    json j = {{"tick", e.tick}};
    if (e.kind == SessionEventKind::kSteer) {
      j["type"] = "steer";
      j["speed"] = e.steering.speed;
      j["heading_rate"] = e.steering.heading_rate;
    } else {
      j["type"] = "reset";
      if (e.seed) j["seed"] = *e.seed;
    }
    list.push_back(j);
  }
  return {{"events", list}};
}

std::vector<SessionEvent> recording_from_json(const json& j) {
  std::vector<SessionEvent> out;
  try {
    std::uint64_t last = 0;
    for (const json& e : j.at("events")) {
      SessionEvent ev;
      ev.tick = e.at("tick").get<std::uint64_t>();
      if (ev.tick == 0 || ev.tick < last) throw ConfigError("event ticks must be positive and ordered");
      last = ev.tick;
      const std::string type = e.at("type").get<std::string>();
      if (type == "steer") {
        ev.steering.speed = finite_number(e, "speed");
        ev.steering.heading_rate = finite_number(e, "heading_rate");
      } else if (type == "reset") {
        ev.kind = SessionEventKind::kReset;
        if (e.contains("seed")) ev.seed = e.at("seed").get<std::uint64_t>();
      } else {
        throw ConfigError("unknown event type '" + type + "'");
      }
      out.push_back(ev);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed recording: ") + ex.what());
  }
  return out;
}

ScenarioConfig session_scenario(const RunConfig& config) {
  ScenarioConfig s = config.scenario;
  s.evader.kind = EvaderKind::kExternal;
  s.evader.start.vx = 0.0;
  s.evader.start.vy = 0.0;
  s.require_conditions = false;
  return s;
}

Session::Session(const RunConfig& config, SessionOptions options, bool start_paused)
    : config_(config), options_(options), paused_(start_paused) {
  config_.validate();
  start_segment(config_.scenario.seed);
}

void Session::start_segment(std::uint64_t seed) {
  if (sim_) finished_.push_back(sim_->log());
  sim_ = std::make_unique<Simulation>(make_simulation(config_, seed));
  requested_ = SteeringCommand{};
}

json Session::error_frame(const std::string& code, const std::string& message) const {
  return {{"type", "error"}, {"code", code}, {"message", message}, {"tick", tick_}};
}

json Session::accept(const std::string& text) {
  while (!arrivals_.empty() &&
         arrivals_.front() + static_cast<std::uint64_t>(options_.rate_window) <= periods_) {
    arrivals_.pop_front();
  }
  if (static_cast<int>(arrivals_.size()) + 1 >= options_.rate_limit) {
    arrivals_.push_back(periods_);
    return error_frame("rate_limited", "message dropped: rate limit reached");
  }
  arrivals_.push_back(periods_);

  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    return error_frame("malformed", "frame is not valid JSON");
  }
  try {
    if (!msg.is_object()) throw ConfigError("frame must be a JSON object");
    const auto type_it = msg.find("type");
    if (type_it == msg.end() || !type_it->is_string()) {
      throw ConfigError("missing string field 'type'");
    }
    const std::string type = type_it->get<std::string>();
    auto effect_tick = [&] {
      if (!msg.contains("tick")) return tick_ + 1;
      if (!msg["tick"].is_number_unsigned()) throw ConfigError("field 'tick' must be unsigned");
      const auto t = msg["tick"].get<std::uint64_t>();
      if (t <= tick_) throw ConfigError("field 'tick' must be later than the current tick");
      return t;
    };
    json ack = {{"type", "ack"}, {"for", type}, {"tick", tick_}};
    if (type == "steer") {
      only_keys(msg, {"type", "speed", "heading_rate", "tick"});
      SteeringCommand s;
      s.speed = std::clamp(finite_number(msg, "speed"), 0.0, config_.chase.priors.V_bar);
      s.heading_rate = finite_number(msg, "heading_rate");
      const std::uint64_t at = effect_tick();
      schedule_[at].steer = s;
      ack["effect_tick"] = at;
      ack["steering"] = steering_json(s);
      return ack;
    }
    if (type == "pause") {
      only_keys(msg, {"type", "tick"});
      const std::uint64_t at = effect_tick();
      schedule_[at].pause = true;
      ack["effect_tick"] = at;
      return ack;
    }
    if (type == "resume") {
      only_keys(msg, {"type"});
      paused_ = false;
      ack["effect_tick"] = tick_ + 1;
      return ack;
    }
    if (type == "reset") {
      only_keys(msg, {"type", "seed", "tick"});
      SessionEvent reset;
      reset.kind = SessionEventKind::kReset;
      if (msg.contains("seed")) {
        if (!msg["seed"].is_number_unsigned()) throw ConfigError("field 'seed' must be unsigned");
        reset.seed = msg["seed"].get<std::uint64_t>();
      }
      const std::uint64_t at = effect_tick();
      schedule_[at].reset = reset;
      schedule_[at].steer.reset();
      ack["effect_tick"] = at;
      return ack;
    }
    throw ConfigError("unknown message type '" + type + "'");
  } catch (const ConfigError& e) {
    return error_frame("schema", e.what());
  }
}

std::optional<json> Session::advance() {
  ++periods_;
  const std::uint64_t now = tick_ + 1;
  const auto due = schedule_.find(now);
  if (due != schedule_.end() && due->second.pause) {
    due->second.pause = false;
    paused_ = true;
  }
  if (paused_) return std::nullopt;
  if (due != schedule_.end()) {
    if (due->second.reset) {
      SessionEvent e = *due->second.reset;
      e.tick = now;
      recording_.push_back(e);
      start_segment(e.seed.value_or(config_.scenario.seed));
    }
    if (due->second.steer) {
      SessionEvent e;
      e.tick = now;
      e.steering = *due->second.steer;
      recording_.push_back(e);
      requested_ = *due->second.steer;
    }
    schedule_.erase(due);
  }
  sim_->evader().set_steering(requested_);
  const SimRecord& r = sim_->tick();
  tick_ = now;
  json frame = record_json(r);
  frame["type"] = "state";
  frame["tick"] = tick_;
  frame["steering"] = steering_json(sim_->evader().applied());
  if (r.fault) paused_ = true;
  frame["paused"] = paused_;
  return frame;
}

std::vector<SimLog> Session::logs() const {
  std::vector<SimLog> out = finished_;
  out.push_back(sim_->log());
  return out;
}

json Session::summary() const {
  return {{"tick", tick_},
          {"paused", paused_},
          {"segments", finished_.size() + 1},
          {"events", recording_.size()},
          {"faults", sim_->log().faults}};
}

void Session::write_logs(const std::filesystem::path& dir) const {
  const std::vector<SimLog> all = logs();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto seg = dir / ("run_" + std::to_string(i));
    std::ostringstream csv, tel, pred;
    write_log_csv(csv, all[i]);
    write_telemetry_csv(tel, all[i]);
    write_prediction_csv(pred, all[i]);
    write_file(seg / "log.csv", csv.str());
    write_file(seg / "telemetry.csv", tel.str());
    write_file(seg / "prediction.csv", pred.str());
    write_file(seg / "log.json", log_json(all[i]).dump(2) + "\n");
  }
  write_file(dir / "recording.json", recording_json(recording_).dump(2) + "\n");
}

std::vector<SimLog> replay(const RunConfig& config, const std::vector<SessionEvent>& events,
                           std::uint64_t ticks) {
  std::vector<SimLog> out;
  auto sim = std::make_unique<Simulation>(make_simulation(config, config.scenario.seed));
  SteeringCommand steering;
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= ticks; ++k) {
    for (; next < events.size() && events[next].tick == k; ++next) {
      const SessionEvent& e = events[next];
      if (e.kind == SessionEventKind::kReset) {
        out.push_back(sim->log());
        sim = std::make_unique<Simulation>(
            make_simulation(config, e.seed.value_or(config.scenario.seed)));
        steering = SteeringCommand{};
      } else {
        steering = e.steering;
      }
    }
    sim->evader().set_steering(steering);
    sim->tick();
  }
  out.push_back(sim->log());
  return out;
}

}  // namespace quadchase::tools

#include "quadchase_tools/config.hpp"

#include <fstream>
#include <set>

#include "quadchase/defaults.hpp"

namespace quadchase::tools {
namespace {

using nlohmann::json;

// Reads typed fields from one JSON object and rejects keys it never asked
// about.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  void vector(const char* key, Eigen::VectorXd& out, Eigen::Index size) {
    std::vector<double> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (static_cast<Eigen::Index>(v.size()) != size) {
      throw ConfigError(path_ + "." + key + ": expected " + std::to_string(size) + " numbers");
    }
    out = Eigen::Map<Eigen::VectorXd>(v.data(), size);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::VectorXd lower_of(const Polytope& box, Eigen::Index dim) {
  return bounding_box(box).value_or(std::pair{Eigen::VectorXd::Zero(dim),
                                              Eigen::VectorXd::Zero(dim)}).first;
}

Eigen::VectorXd upper_of(const Polytope& box, Eigen::Index dim) {
  return bounding_box(box).value_or(std::pair{Eigen::VectorXd::Zero(dim),
                                              Eigen::VectorXd::Zero(dim)}).second;
}

void read_quad(const json& j, QuadParams& p) {
  ObjectReader r(j, "quad");
  r.get("a_r", p.a_r);
  r.get("a_p", p.a_p);
  r.get("b_r1", p.b_r1);
  r.get("b_r0", p.b_r0);
  r.get("b_p1", p.b_p1);
  r.get("b_p0", p.b_p0);
  r.get("mass", p.mass);
  r.get("gravity", p.gravity);
  r.finish();
}

void read_mpc(const json& j, MpcConfig& c) {
  ObjectReader r(j, "mpc");
  r.get("N", c.N);
  r.get("dt", c.dt);
  Eigen::VectorXd q = c.Q.diagonal();
  r.vector("Q_diag", q, kStateDim);
  c.Q = q.asDiagonal();
  Eigen::VectorXd rr = c.R.diagonal();
  r.vector("R_diag", rr, kInputDim);
  c.R = rr.asDiagonal();
  r.get("slack_weight_quadratic", c.slack_weight_quadratic);
  r.get("slack_weight_linear", c.slack_weight_linear);
  std::string input_cost = c.input_cost == InputCost::kLiteral ? "literal" : "trim_deviation";
  r.get("input_cost", input_cost);
  if (input_cost == "literal") {
    c.input_cost = InputCost::kLiteral;
  } else if (input_cost == "trim_deviation") {
    c.input_cost = InputCost::kTrimDeviation;
  } else {
    throw ConfigError("mpc.input_cost: expected 'trim_deviation' or 'literal'");
  }
  std::string angle_mode = c.angle_mode == AngleMode::kZero ? "zero" : "flat";
  r.get("angle_mode", angle_mode);
  if (angle_mode == "flat") {
    c.angle_mode = AngleMode::kFlat;
  } else if (angle_mode == "zero") {
    c.angle_mode = AngleMode::kZero;
  } else {
    throw ConfigError("mpc.angle_mode: expected 'flat' or 'zero'");
  }
  r.get("max_iter", c.qp.max_iter);
  r.finish();
}

void read_chase(const json& j, ChaseSettings& s) {
  ObjectReader r(j, "chase");
  VelocityBounds& b = s.priors;
  r.get("V_bar", b.V_bar);
  r.get("Theta_lo", b.Theta_lo);
  r.get("Theta_hi", b.Theta_hi);
  r.get("beta_v", b.beta_v);
  r.get("beta_lo", b.beta_lo);
  r.get("beta_hi", b.beta_hi);
  b = VelocityBounds::from_priors(b.V_bar, b.Theta_lo, b.Theta_hi, b.beta_v, b.beta_lo,
                                  b.beta_hi);
  r.get("capture_height", s.capture_height);
  r.get("window", s.window);
  Eigen::VectorXd xl = lower_of(s.X, kStateDim), xu = upper_of(s.X, kStateDim);
  Eigen::VectorXd ul = lower_of(s.U, kInputDim), uu = upper_of(s.U, kInputDim);
  r.vector("state_lower", xl, kStateDim);
  r.vector("state_upper", xu, kStateDim);
  r.vector("input_lower", ul, kInputDim);
  r.vector("input_upper", uu, kInputDim);
  if ((xl.array() > xu.array()).any()) throw ConfigError("chase: state_lower exceeds state_upper");
  if ((ul.array() > uu.array()).any()) throw ConfigError("chase: input_lower exceeds input_upper");
  s.X = Polytope::box(xl, xu);
  s.U = Polytope::box(ul, uu);
  r.finish();
}

void read_evader(const json& j, EvaderSpec& e) {
  ObjectReader r(j, "scenario.evader");
  std::string kind = to_string(e.kind);
  r.get("kind", kind);
  try {
    e.kind = evader_kind_from_string(kind);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("scenario.evader.kind: ") + ex.what());
  }
  r.get("radius", e.radius);
  r.get("speed", e.speed);
  Eigen::VectorXd center = e.center;
  r.vector("center", center, 2);
  e.center = center;
  r.get("min_speed", e.min_speed);
  r.get("speed_cap", e.speed_cap);
  r.get("mean_speed", e.mean_speed);
  r.get("accel_std", e.accel_std);
  r.get("accel_cap", e.accel_cap);
  r.get("heading_rate_cap", e.heading_rate_cap);
  r.get("heading_rate_std", e.heading_rate_std);
  r.get("slip_std", e.slip_std);
  r.get("reversion_time", e.reversion_time);
  r.get("arena_half_width", e.arena_half_width);
  r.get("wall_margin", e.wall_margin);
  if (const json* start = r.child("start")) {
    ObjectReader s(*start, r.path("start"));
    s.get("x", e.start.x);
    s.get("y", e.start.y);
    s.get("vx", e.start.vx);
    s.get("vy", e.start.vy);
    s.get("heading", e.start.heading);
    s.finish();
  }
  if (const json* script = r.child("script")) {
    if (!script->is_array()) throw ConfigError("scenario.evader.script: expected an array");
    e.script.clear();
    for (const json& item : *script) {
      ObjectReader s(item, r.path("script[]"));
      TimedSteering ts;
      s.get("t", ts.t);
      s.get("speed", ts.command.speed);
      s.get("heading_rate", ts.command.heading_rate);
      s.finish();
      e.script.push_back(ts);
    }
  }
  r.finish();
}

void read_scenario(const json& j, ScenarioConfig& c) {
  ObjectReader r(j, "scenario");
  r.get("name", c.name);
  r.get("duration", c.duration);
  r.get("seed", c.seed);
  r.get("require_conditions", c.require_conditions);
  if (const json* e = r.child("evader")) read_evader(*e, c.evader);
  if (const json* n = r.child("noise")) {
    ObjectReader nr(*n, "scenario.noise");
    nr.get("position_std", c.noise.position_std);
    nr.get("velocity_std", c.noise.velocity_std);
    nr.get("delay_steps", c.noise.delay_steps);
    nr.get("antithetic", c.noise.antithetic);
    nr.finish();
  }
  if (r.child("initial_quad")) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(kStateDim);
    r.vector("initial_quad", x0, kStateDim);
    c.initial_quad = QuadState(x0);
  }
  r.finish();
}

void read_sweep(const json& j, SweepConfig& s) {
  ObjectReader r(j, "sweep");
  r.get("sigmas", s.sigmas);
  r.get("delays", s.delays);
  r.get("seeds", s.seeds);
  r.get("antithetic", s.antithetic);
  r.finish();
}

void read_verify(const json& j, VerifyConfig& v) {
  ObjectReader r(j, "verify");
  r.get("invariance_samples", v.invariance_samples);
  r.get("feasibility_runs", v.feasibility_runs);
  r.get("feasibility_duration", v.feasibility_duration);
  r.get("ball_rollouts", v.ball_rollouts);
  r.get("ball_steps", v.ball_steps);
  r.get("prediction_sectors", v.prediction_sectors);
  r.get("seed", v.seed);
  r.finish();
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.chase = default_chase_settings(c.params);
  c.scenario.dt = c.mpc.dt;
  return c;
}

void RunConfig::validate() const {
  try {
    params.validate();
    mpc.validate();
    chase.priors.validate();
    if (!(chase.capture_height > 0.0)) throw ConfigError("chase.capture_height must be positive");
    if (chase.window < 1) throw ConfigError("chase.window must be >= 1");
    scenario.validate(make_controller());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  for (double s : sweep.sigmas) {
    if (!(s >= 0.0)) throw ConfigError("sweep.sigmas must be nonnegative");
  }
  for (int d : sweep.delays) {
    if (d < 0) throw ConfigError("sweep.delays must be nonnegative");
  }
  if (sweep.seeds.empty() || sweep.sigmas.empty() || sweep.delays.empty()) {
    throw ConfigError("sweep: sigmas, delays and seeds must be nonempty");
  }
  if (verify.invariance_samples < 1 || verify.feasibility_runs < 0 || verify.ball_rollouts < 0 ||
      verify.ball_steps < 1 || verify.prediction_sectors < 0 ||
      !(verify.feasibility_duration > 0.0)) {
    throw ConfigError("verify: counts must be nonnegative and durations positive");
  }
}

Controller RunConfig::make_controller() const { return Controller(params, mpc, chase); }

RunConfig parse_config(const json& j) {
  RunConfig c = default_run_config();
  try {
    ObjectReader r(j, "config");
    if (const json* q = r.child("quad")) read_quad(*q, c.params);
    // The input box defaults scale with the weight, so rebuild them from the
    // parsed parameters before reading overrides.
    c.chase = default_chase_settings(c.params);
    if (const json* m = r.child("mpc")) read_mpc(*m, c.mpc);
    if (const json* s = r.child("chase")) read_chase(*s, c.chase);
    c.scenario.dt = c.mpc.dt;
    if (const json* s = r.child("scenario")) read_scenario(*s, c.scenario);
    if (const json* s = r.child("sweep")) read_sweep(*s, c.sweep);
    if (const json* v = r.child("verify")) read_verify(*v, c.verify);
    r.finish();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  const QuadParams& p = c.params;
  j["quad"] = {{"a_r", p.a_r},   {"a_p", p.a_p},   {"b_r1", p.b_r1}, {"b_r0", p.b_r0},
               {"b_p1", p.b_p1}, {"b_p0", p.b_p0}, {"mass", p.mass}, {"gravity", p.gravity}};
  j["mpc"] = {{"N", c.mpc.N},
              {"dt", c.mpc.dt},
              {"Q_diag", vec(c.mpc.Q.diagonal())},
              {"R_diag", vec(c.mpc.R.diagonal())},
              {"slack_weight_quadratic", c.mpc.slack_weight_quadratic},
              {"slack_weight_linear", c.mpc.slack_weight_linear},
              {"input_cost",
               c.mpc.input_cost == InputCost::kLiteral ? "literal" : "trim_deviation"},
              {"angle_mode", c.mpc.angle_mode == AngleMode::kZero ? "zero" : "flat"},
              {"max_iter", c.mpc.qp.max_iter}};
  const VelocityBounds& b = c.chase.priors;
  j["chase"] = {{"V_bar", b.V_bar},
                {"Theta_lo", b.Theta_lo},
                {"Theta_hi", b.Theta_hi},
                {"beta_v", b.beta_v},
                {"beta_lo", b.beta_lo},
                {"beta_hi", b.beta_hi},
                {"capture_height", c.chase.capture_height},
                {"window", c.chase.window},
                {"state_lower", vec(lower_of(c.chase.X, kStateDim))},
                {"state_upper", vec(upper_of(c.chase.X, kStateDim))},
                {"input_lower", vec(lower_of(c.chase.U, kInputDim))},
                {"input_upper", vec(upper_of(c.chase.U, kInputDim))}};
  const EvaderSpec& e = c.scenario.evader;
  json evader = {{"kind", to_string(e.kind)},
                 {"radius", e.radius},
                 {"speed", e.speed},
                 {"center", vec(e.center)},
                 {"min_speed", e.min_speed},
                 {"speed_cap", e.speed_cap},
                 {"mean_speed", e.mean_speed},
                 {"accel_std", e.accel_std},
                 {"accel_cap", e.accel_cap},
                 {"heading_rate_cap", e.heading_rate_cap},
                 {"heading_rate_std", e.heading_rate_std},
                 {"slip_std", e.slip_std},
                 {"reversion_time", e.reversion_time},
                 {"arena_half_width", e.arena_half_width},
                 {"wall_margin", e.wall_margin},
                 {"start",
                  {{"x", e.start.x},
                   {"y", e.start.y},
                   {"vx", e.start.vx},
                   {"vy", e.start.vy},
                   {"heading", e.start.heading}}}};
  json script = json::array();
  for (const TimedSteering& s : e.script) {
    script.push_back({{"t", s.t}, {"speed", s.command.speed},
                      {"heading_rate", s.command.heading_rate}});
  }
  evader["script"] = script;
  j["scenario"] = {{"name", c.scenario.name},
                   {"duration", c.scenario.duration},
                   {"seed", c.scenario.seed},
                   {"require_conditions", c.scenario.require_conditions},
                   {"evader", evader},
                   {"noise",
                    {{"position_std", c.scenario.noise.position_std},
                     {"velocity_std", c.scenario.noise.velocity_std},
                     {"delay_steps", c.scenario.noise.delay_steps},
                     {"antithetic", c.scenario.noise.antithetic}}}};
  if (c.scenario.initial_quad) j["scenario"]["initial_quad"] = vec(*c.scenario.initial_quad);
  j["sweep"] = {{"sigmas", c.sweep.sigmas},
                {"delays", c.sweep.delays},
                {"seeds", c.sweep.seeds},
                {"antithetic", c.sweep.antithetic}};
  j["verify"] = {{"invariance_samples", c.verify.invariance_samples},
                 {"feasibility_runs", c.verify.feasibility_runs},
                 {"feasibility_duration", c.verify.feasibility_duration},
                 {"ball_rollouts", c.verify.ball_rollouts},
                 {"ball_steps", c.verify.ball_steps},
                 {"prediction_sectors", c.verify.prediction_sectors},
                 {"seed", c.verify.seed}};
  return j;
}

ScenarioConfig preset_scenario(const std::string& suite, const ScenarioConfig& base) {
  ScenarioConfig s = base;
  if (suite == "sim1") {
    s.name = "sim1";
    s.evader.kind = EvaderKind::kCircular;
  } else if (suite == "sim2") {
    s.name = "sim2";
    s.evader.kind = EvaderKind::kRandomWalk;
  } else {
    throw ConfigError("unknown scenario suite '" + suite + "' (expected sim1 or sim2)");
  }
  return s;
}

}  // namespace quadchase::tools

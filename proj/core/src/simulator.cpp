#include "quadchase/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace quadchase {

const char* to_string(EvaderKind kind) {
  switch (kind) {
    case EvaderKind::kCircular:
      return "circular";
    case EvaderKind::kRandomWalk:
      return "random_walk";
    case EvaderKind::kScripted:
      return "scripted";
    case EvaderKind::kExternal:
      return "external";
  }
  return "unknown";
}

EvaderKind evader_kind_from_string(const std::string& name) {
  for (EvaderKind k : {EvaderKind::kCircular, EvaderKind::kRandomWalk, EvaderKind::kScripted,
                       EvaderKind::kExternal}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown evader kind: " + name);
}

Evader::Evader(const EvaderSpec& spec, const VelocityBounds& priors, std::uint64_t seed)
    : spec_(spec), priors_(priors), rng_(seed) {
  if (spec_.kind == EvaderKind::kCircular) {
    if (!(spec_.radius > 0.0)) throw std::invalid_argument("Evader: radius must be positive");
    state_ = VehicleState{};
    state_.x = spec_.center.x() + spec_.radius;
    state_.y = spec_.center.y();
    state_.heading = 0.0;
    const Eigen::Vector2d v = ground_velocity(std::clamp(spec_.speed, 0.0, priors_.V_bar),
                                              0.0, state_.heading);
    state_.vx = v.x();
    state_.vy = v.y();
  } else {
    state_ = spec_.start;
  }
  walk_speed_ = std::clamp(spec_.mean_speed, 0.0, std::min(spec_.speed_cap, priors_.V_bar));
}

SteeringCommand Evader::command_at(double t, double dt) {
  switch (spec_.kind) {
    case EvaderKind::kCircular:
      return {spec_.speed, -spec_.speed / spec_.radius};
    case EvaderKind::kScripted: {
      SteeringCommand c;
      for (const auto& s : spec_.script) {
        if (s.t <= t + 1e-9) c = s.command;
      }
      return c;
    }
    case EvaderKind::kExternal:
      return external_;
    case EvaderKind::kRandomWalk: {
      std::normal_distribution<double> n01;
      const double a = dt / spec_.reversion_time;
      const double k = std::sqrt(2.0 * a);
      const double cap = std::min(spec_.speed_cap, priors_.V_bar);
      const double xi_accel = n01(rng_);
      const double xi_rate = n01(rng_);
      const double xi_slip = n01(rng_);
      walk_accel_ = std::clamp(walk_accel_ - a * walk_accel_ + spec_.accel_std * k * xi_accel,
                               -spec_.accel_cap, spec_.accel_cap);
      const double pull = (spec_.mean_speed - walk_speed_) / spec_.reversion_time;
      walk_speed_ =
          std::clamp(walk_speed_ + dt * (walk_accel_ + pull), std::min(spec_.min_speed, cap), cap);
      walk_rate_ = std::clamp(walk_rate_ - a * walk_rate_ + spec_.heading_rate_std * k * xi_rate,
                              -spec_.heading_rate_cap, spec_.heading_rate_cap);
      slip_ = slip_ - a * slip_ + spec_.slip_std * k * xi_slip;

      const double L = spec_.arena_half_width;
      const Eigen::Vector2d p = state_.position();
      const double bearing = state_.heading + slip_;
      const Eigen::Vector2d dir(std::sin(bearing), std::cos(bearing));
      const bool near_wall = L - std::max(std::abs(p.x()), std::abs(p.y())) < spec_.wall_margin;
      const Eigen::Vector2d home = p.norm() > 1e-9 ? Eigen::Vector2d(-p.normalized())
                                                   : Eigen::Vector2d(dir);
      if (!turning_back_ && near_wall && dir.dot(home) < 0.0) {
        turning_back_ = true;
        reversals_.push_back(t);
      }
      if (turning_back_) {
        if (dir.dot(home) >= std::cos(std::numbers::pi / 4.0)) {
          turning_back_ = false;
          walk_rate_ = 0.0;
        } else {
          // Bearings grow clockwise; turn the short way toward home.
          const double cross = dir.x() * home.y() - dir.y() * home.x();
          walk_rate_ = cross > 0.0 ? -spec_.heading_rate_cap : spec_.heading_rate_cap;
        }
      }
      return {walk_speed_, walk_rate_};
    }
  }
  return {};
}

void Evader::step(double t, double dt) {
  SteeringCommand c = command_at(t, dt);
  c.speed = std::clamp(c.speed, 0.0, priors_.V_bar);
  if (!std::isfinite(c.heading_rate)) c.heading_rate = 0.0;
  slip_ = std::clamp(slip_, priors_.Theta_lo, priors_.Theta_hi);
  applied_ = c;

  state_.heading = wrap_angle(state_.heading + c.heading_rate * dt);
  state_ = vehicle_step(state_, ground_velocity(c.speed, slip_, state_.heading), dt);

  if (spec_.kind != EvaderKind::kRandomWalk) return;
  const double L = spec_.arena_half_width;
  bool reflected = false;
  double bearing = state_.heading + slip_;
  if (std::abs(state_.x) > L) {
    state_.x = std::copysign(2.0 * L, state_.x) - state_.x;
    state_.vx = -state_.vx;
    bearing = -bearing;
    reflected = true;
  }
  if (std::abs(state_.y) > L) {
    state_.y = std::copysign(2.0 * L, state_.y) - state_.y;
    state_.vy = -state_.vy;
    bearing = std::numbers::pi - bearing;
    reflected = true;
  }
  if (reflected) {
    state_.heading = wrap_angle(bearing - slip_);
    walk_rate_ = -walk_rate_;
    reversals_.push_back(t + dt);
  }
}

void ScenarioConfig::validate(const Controller& controller) const {
  if (!(duration > 0.0)) throw std::invalid_argument("scenario: duration must be positive");
  if (std::abs(dt - controller.config().dt) > 1e-12) {
    throw std::invalid_argument("scenario: dt must match the controller dt");
  }
  if (noise.position_std < 0.0 || noise.velocity_std < 0.0 || noise.delay_steps < 0) {
    throw std::invalid_argument("scenario: noise settings must be nonnegative");
  }
  const double V_bar = controller.settings().priors.V_bar;
  if (evader.kind == EvaderKind::kCircular) {
    if (!(evader.radius > 0.0)) throw std::invalid_argument("scenario: radius must be positive");
    if (evader.speed < 0.0 || evader.speed > V_bar) {
      throw std::invalid_argument("scenario: circular speed must lie in [0, V_bar]");
    }
  }
  if (evader.kind == EvaderKind::kRandomWalk) {
    if (evader.min_speed < 0.0 || evader.min_speed > evader.speed_cap) {
      throw std::invalid_argument("scenario: random-walk speeds need 0 <= min_speed <= speed_cap");
    }
    if (evader.speed_cap > V_bar) {
      throw std::invalid_argument("scenario: random-walk speed cap exceeds V_bar");
    }
    if (!(evader.reversion_time > 0.0) || !(evader.arena_half_width > 0.0) ||
        evader.wall_margin < 0.0 ||
        evader.heading_rate_cap < 0.0 || evader.accel_cap < 0.0) {
      throw std::invalid_argument("scenario: invalid random-walk parameters");
    }
  }
  if (initial_quad && !initial_quad->allFinite()) {
    throw std::invalid_argument("scenario: initial quad state must be finite");
  }
}

double tracking_error(const QuadState& quad, const VehicleState& vehicle) {
  return std::hypot(quad(idx::kX) - vehicle.x, quad(idx::kY) - vehicle.y);
}

TrackingMetrics compute_metrics(const SimLog& log, double threshold, double reversal_window) {
  TrackingMetrics m;
  m.faults = log.faults;
  const std::size_t n = log.records.size();
  if (n == 0) return m;
  for (const auto& r : log.records) {
    m.errors.push_back(r.error);
    m.peak = std::max(m.peak, r.error);
    m.max_slack = std::max(m.max_slack, r.max_slack);
    if (!m.convergence_time && r.error <= threshold) m.convergence_time = r.t;
  }
  const std::size_t tail_begin = n - std::max<std::size_t>(1, n / 4);
  double sum = 0.0;
  for (std::size_t i = tail_begin; i < n; ++i) sum += m.errors[i];
  m.steady_state = sum / static_cast<double>(n - tail_begin);

  const std::size_t warmup = n / 4;
  for (std::size_t i = warmup; i < n; ++i) {
    const double t = log.records[i].t;
    const bool in_window = std::any_of(log.reversals.begin(), log.reversals.end(), [&](double tr) {
      return t >= tr - 1e-9 && t <= tr + reversal_window + 1e-9;
    });
    if (!in_window) m.outside_reversal_peak = std::max(m.outside_reversal_peak, m.errors[i]);
  }
  return m;
}

Simulation::Simulation(const ScenarioConfig& config, Controller controller)
    : config_(config),
      controller_(std::move(controller)),
      evader_(config.evader, controller_.settings().priors, config.seed),
      noise_rng_(config.seed ^ 0x9e3779b97f4a7c15ULL) {
  config_.validate(controller_);
  const VehicleState& v = evader_.state();
  quad_ = config_.initial_quad.value_or(
      hover_state(v.x, v.y, controller_.settings().capture_height));
  last_command_ = hover_input(controller_.params());
  delay_.assign(static_cast<std::size_t>(config_.noise.delay_steps), last_command_);
  total_ticks_ = static_cast<int>(std::llround(config_.duration / config_.dt));
  log_.name = config_.name;
  log_.seed = config_.seed;
  log_.dt = config_.dt;
  log_.horizon = controller_.config().N;
  log_.V_bar = controller_.settings().priors.V_bar;
}

bool Simulation::finished() const { return ticks() >= total_ticks_; }

const SimRecord& Simulation::tick() {
  const double t = time();
  QuadState measured = quad_;
  VehicleState vehicle = evader_.state();
  std::normal_distribution<double> normal;
  const double sign = config_.noise.antithetic ? -1.0 : 1.0;
  auto n01 = [&](std::mt19937_64& rng) { return sign * normal(rng); };
  if (config_.noise.position_std > 0.0) {
    const double s = config_.noise.position_std;
    for (int i : {idx::kX, idx::kY, idx::kZ}) measured(i) += s * n01(noise_rng_);
    vehicle.x += s * n01(noise_rng_);
    vehicle.y += s * n01(noise_rng_);
  }
  if (config_.noise.velocity_std > 0.0) {
    const double s = config_.noise.velocity_std;
    for (int i : {idx::kXDot, idx::kYDot, idx::kZDot}) measured(i) += s * n01(noise_rng_);
    vehicle.vx += s * n01(noise_rng_);
    vehicle.vy += s * n01(noise_rng_);
  }

  const StepDiagnostics d = controller_.step(t, measured, vehicle);
  const QuadInput command = d.fault ? last_command_ : d.command;
  last_command_ = command;
  QuadInput applied = command;
  if (!delay_.empty()) {
    delay_.push_back(command);
    applied = delay_.front();
    delay_.pop_front();
  }

  SimRecord r;
  r.t = t;
  r.quad = quad_;
  r.vehicle = evader_.state();
  r.command = command;
  r.applied = applied;
  r.status = d.status;
  r.fault = d.fault;
  r.cost = d.cost;
  r.max_slack = d.max_slack;
  r.iterations = d.iterations;
  r.terminal_in_ball = d.terminal_in_ball;
  r.bounds = d.bounds;
  r.sector = d.sector;
  r.estimate = d.estimate;
  r.error = tracking_error(quad_, evader_.state());
  if (d.fault) ++log_.faults;
  log_.records.push_back(r);

  quad_ = step(controller_.model(), quad_, applied);
  evader_.step(t, config_.dt);
  log_.reversals = evader_.reversals();
  return log_.records.back();
}

SimLog run_scenario(const ScenarioConfig& config, Controller controller) {
  std::optional<TerminalConditionsReport> report;
  if (config.require_conditions) {
    TerminalConditionsOptions opt;
    opt.N = controller.config().N;
    opt.H = controller.settings().capture_height;
    report = check_terminal_conditions(controller.model(), controller.settings().X,
                                     controller.settings().U,
                                     controller.settings().priors.V_bar, opt);
    if (!report->set_conditions()) {
      throw std::runtime_error("run_scenario: terminal-set conditions 1 and 3 do not hold");
    }
  }
  Simulation sim(config, std::move(controller));
  while (!sim.finished()) sim.tick();
  SimLog log = sim.take_log();
  log.conditions = report;
  return log;
}

int ball_violations(const SimLog& log, double tol) {
  const double radius = log.V_bar * log.horizon * log.dt;
  const auto n = static_cast<int>(log.records.size());
  int violations = 0;
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d c = log.records[k].vehicle.position();
    for (int j = 1; j <= log.horizon && k + j < n; ++j) {
      if ((log.records[k + j].vehicle.position() - c).norm() > radius + tol) ++violations;
    }
  }
  return violations;
}

}  // namespace quadchase

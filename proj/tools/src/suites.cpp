#include "quadchase_tools/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <optional>
#include <random>

#include "quadchase/prediction.hpp"
#include "quadchase/terminal_sets.hpp"
#include "quadchase_tools/io.hpp"

namespace quadchase::tools {

using nlohmann::json;

namespace {

constexpr double kSlackTol = 1e-6;

Eigen::Vector2d admissible_velocity(std::mt19937_64& rng, const VelocityBounds& b) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double speed = b.V_bar * U(rng);
  const double slip = b.Theta_lo + (b.Theta_hi - b.Theta_lo) * U(rng);
  const double heading = std::numbers::pi * (2.0 * U(rng) - 1.0);
  return ground_velocity(speed, slip, heading);
}

}  // namespace

CheckResult check_conditions(const RunConfig& config) {
  const Controller ctl = config.make_controller();
  TerminalConditionsOptions opt;
  opt.samples = config.verify.invariance_samples;
  opt.seed = config.verify.seed;
  opt.N = config.mpc.N;
  opt.H = config.chase.capture_height;
  const TerminalConditionsReport report = check_terminal_conditions(ctl.model(), config.chase.X,
                                                      config.chase.U,
                                                      config.chase.priors.V_bar, opt);
  return {"conditions", report.all(), conditions_json(report)};
}

CheckResult check_terminal_invariance(const RunConfig& config, int samples,
                                      std::uint64_t seed) {
  const Controller ctl = config.make_controller();
  const TerminalSet origin = ctl.terminal_at(Eigen::Vector2d::Zero());
  const auto box = bounding_box(origin.hull_polytope());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int undefined = 0, escaped = 0, drawn = 0;
  std::optional<QuadState> witness;
  while (drawn < samples) {
    QuadState x;
    for (int i = 0; i < kStateDim; ++i) {
      x(i) = box->first(i) + (box->second(i) - box->first(i)) * U(rng);
    }
    if (!origin.contains(x)) continue;
    ++drawn;
    const Eigen::Vector2d X_c = admissible_velocity(rng, config.chase.priors) * config.mpc.dt;
    const TerminalControllerResult tc = terminal_controller(x, X_c, ctl.model(), config.chase.U);
    bool ok = tc.status != TerminalStatus::kInfeasible;
    if (!ok) {
      ++undefined;
    } else if (!ctl.terminal_at(X_c).contains(step(ctl.model(), x, tc.input), 1e-9)) {
      ++escaped;
      ok = false;
    }
    if (!ok && !witness) witness = x;
  }
  json details = {{"samples", samples},
                  {"controller_undefined", undefined},
                  {"successor_outside", escaped},
                  {"violations", undefined + escaped}};
  if (witness) details["witness"] = state_json(*witness);
  return {"invariance", undefined + escaped == 0, details};
}

CheckResult check_recursive_feasibility(const RunConfig& config, int runs, double duration,
                                        std::uint64_t seed) {
  const Controller proto = config.make_controller();
  ScenarioConfig base = config.scenario;
  base.evader.kind = EvaderKind::kRandomWalk;
  base.duration = duration;
  base.require_conditions = false;
  base.noise = NoiseConfig{};
  base.evader.speed_cap = std::min(base.evader.speed_cap, config.chase.priors.V_bar);
  base.evader.min_speed = std::min(base.evader.min_speed, base.evader.speed_cap);
  const TerminalSet terminal = proto.terminal_at(base.evader.start.position());
  const FeasibleStartSet starts =
      build_feasible_start_set(proto.model(), terminal, config.chase.X, config.chase.U,
                               config.mpc.N);
  std::mt19937_64 rng(seed);
  int failed_runs = 0, steps = 0, non_optimal = 0;
  double worst_slack = 0.0;
  json failures = json::array();
  for (int r = 0; r < runs; ++r) {
    const auto x0 = starts.sample(rng);
    if (!x0) {
      return {"feasibility", false, {{"error", "could not sample the feasible-start set"}}};
    }
    ScenarioConfig s = base;
    s.seed = seed + 1000 + static_cast<std::uint64_t>(r);
    s.initial_quad = *x0;
    const SimLog log = run_scenario(s, proto);
    int bad_steps = 0;
    double run_slack = 0.0;
    for (const SimRecord& rec : log.records) {
      ++steps;
      run_slack = std::max(run_slack, rec.max_slack);
      if (rec.status != QpStatus::kOptimal) ++non_optimal;
      if (rec.status != QpStatus::kOptimal || rec.max_slack > kSlackTol) ++bad_steps;
    }
    worst_slack = std::max(worst_slack, run_slack);
    if (bad_steps) {
      ++failed_runs;
      if (failures.size() < 5) {
        failures.push_back(
            {{"run", r}, {"seed", s.seed}, {"bad_steps", bad_steps},
             {"max_slack", run_slack}, {"start", state_json(*x0)}});
      }
    }
  }
  json bounds = json::array();
  for (const ReachableChannel& ch : starts.channels) {
    bounds.push_back({{"lower", std::vector<double>(ch.lower.data(), ch.lower.data() + ch.lower.size())},
                      {"upper", std::vector<double>(ch.upper.data(), ch.upper.data() + ch.upper.size())}});
  }
  return {"feasibility",
          failed_runs == 0,
          {{"runs", runs},
           {"steps", steps},
           {"failed_runs", failed_runs},
           {"non_optimal_steps", non_optimal},
           {"max_slack", worst_slack},
           {"slack_tolerance", kSlackTol},
           {"channel_bounds", bounds},
           {"failures", failures}}};
}

CheckResult check_vehicle_ball(const RunConfig& config, int rollouts, int steps,
                               std::uint64_t seed) {
  const VelocityBounds& b = config.chase.priors;
  const int N = config.mpc.N;
  const double dt = config.mpc.dt;
  const double radius = b.V_bar * N * dt;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  long long windows = 0;
  int violations = 0;
  double worst_ratio = 0.0;
  for (int r = 0; r < rollouts; ++r) {
    EvaderSpec spec = config.scenario.evader;
    spec.kind = EvaderKind::kRandomWalk;
    spec.speed_cap = b.V_bar;
    spec.min_speed = b.V_bar * U(rng);
    spec.mean_speed = spec.min_speed + (b.V_bar - spec.min_speed) * U(rng);
    spec.accel_cap = 0.2 + 2.0 * U(rng);
    spec.heading_rate_cap = 0.2 + 2.0 * U(rng);
    Evader ev(spec, b, seed + static_cast<std::uint64_t>(r));
    std::vector<Eigen::Vector2d> path = {ev.state().position()};
    for (int k = 0; k < steps; ++k) {
      ev.step(k * dt, dt);
      path.push_back(ev.state().position());
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      for (int j = 1; j <= N && k + j < path.size(); ++j) {
        ++windows;
        const double d = (path[k + j] - path[k]).norm();
        worst_ratio = std::max(worst_ratio, d / radius);
        if (d > radius + 1e-9) ++violations;
      }
    }
  }
  return {"vehicle_ball",
          violations == 0,
          {{"rollouts", rollouts},
           {"windows", windows},
           {"violations", violations},
           {"radius", radius},
           {"max_distance_over_radius", worst_ratio}}};
}

CheckResult check_prediction_sets(const RunConfig& config, int sectors, std::uint64_t seed) {
  const VelocityBounds& prior = config.chase.priors;
  const int N = config.mpc.N;
  const double dt = config.mpc.dt;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int convexity = 0, center_outside = 0, outside_ball = 0;
  for (int s = 0; s < sectors; ++s) {
    VehicleState v;
    v.x = 10.0 * U(rng) - 5.0;
    v.y = 10.0 * U(rng) - 5.0;
    v.heading = std::numbers::pi * (2.0 * U(rng) - 1.0);
    VelocityBounds b = prior;
    b.v_bar = prior.V_bar * (0.05 + 0.95 * U(rng));
    b.delta_lo = prior.Theta_lo + (prior.Theta_hi - prior.Theta_lo) * U(rng);
    b.delta_hi = b.delta_lo + (prior.Theta_hi - b.delta_lo) * U(rng);
    const PredictionSector sector = predict_sector(v, b, N, dt);
    const PointEstimate est = chebyshev_center(sector);
    if (!contains(sector, est.point, 1e-9)) ++center_outside;
    const Ball2d ball = build_bf(v.position(), prior.V_bar, N, dt);
    // Members by rejection from the sector's bounding disk.
    std::vector<Eigen::Vector2d> members;
    for (int tries = 0; tries < 4000 && members.size() < 40; ++tries) {
      const double r = sector.radius * std::sqrt(U(rng));
      const double a = 2.0 * std::numbers::pi * U(rng);
      const Eigen::Vector2d p = sector.center + r * Eigen::Vector2d(std::cos(a), std::sin(a));
      if (contains(sector, p, 0.0)) members.push_back(p);
    }
    members.push_back(sector.center);
    members.push_back(sector.lower_end());
    members.push_back(sector.upper_end());
    bool convex = true, inside = true;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!ball.contains(members[i], 1e-9)) inside = false;
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (!contains(sector, 0.5 * (members[i] + members[j]), 1e-9)) convex = false;
      }
    }
    if (!convex) ++convexity;
    if (!inside) ++outside_ball;
  }
  return {"prediction",
          convexity + center_outside + outside_ball == 0,
          {{"sectors", sectors},
           {"midpoint_failures", convexity},
           {"center_outside", center_outside},
           {"outside_terminal_ball", outside_ball}}};
}

std::vector<CheckResult> run_verify(const RunConfig& config, const std::string& suite) {
  const VerifyConfig& v = config.verify;
  const std::vector<std::string> known = {"conditions", "invariance", "feasibility",
                                          "vehicle_ball", "prediction"};
  if (suite != "all" && std::find(known.begin(), known.end(), suite) == known.end()) {
    throw ConfigError("unknown verify suite '" + suite + "'");
  }
  auto wanted = [&](const char* name) { return suite == "all" || suite == name; };
  std::vector<CheckResult> out;
  if (wanted("conditions")) out.push_back(check_conditions(config));
  if (wanted("invariance")) {
    out.push_back(check_terminal_invariance(config, v.invariance_samples, v.seed));
  }
  if (wanted("feasibility")) {
    out.push_back(check_recursive_feasibility(config, v.feasibility_runs,
                                              v.feasibility_duration, v.seed));
  }
  if (wanted("vehicle_ball")) {
    out.push_back(check_vehicle_ball(config, v.ball_rollouts, v.ball_steps, v.seed));
  }
  if (wanted("prediction")) out.push_back(check_prediction_sets(config, v.prediction_sectors, v.seed));
  return out;
}

json verify_report(const std::vector<CheckResult>& checks) {
  json list = json::array();
  bool all = true;
  for (const CheckResult& c : checks) {
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    all = all && c.pass;
  }
  return {{"pass", all}, {"checks", list}};
}

double SweepCell::mean() const {
  if (steady_state.empty()) return 0.0;
  double s = 0.0;
  for (double e : steady_state) s += e;
  return s / static_cast<double>(steady_state.size());
}

bool SweepResult::all_monotone() const {
  return std::all_of(monotone.begin(), monotone.end(), [](const auto& m) { return m.second; });
}

SweepResult run_sweep(const RunConfig& config) {
  const Controller proto = config.make_controller();
  SweepResult out;
  for (int delay : config.sweep.delays) {
    double previous = -1.0;
    bool monotone = true;
    for (double sigma : config.sweep.sigmas) {
      SweepCell cell;
      cell.sigma = sigma;
      cell.delay = delay;
      for (int twin = 0; twin < (config.sweep.antithetic ? 2 : 1); ++twin) {
        for (std::uint64_t seed : config.sweep.seeds) {
          ScenarioConfig s = config.scenario;
          s.seed = seed;
          s.noise.position_std = sigma;
          s.noise.delay_steps = delay;
          s.noise.antithetic = twin == 1;
          const SimLog log = run_scenario(s, proto);
          cell.steady_state.push_back(compute_metrics(log).steady_state);
          cell.faults += log.faults;
        }
      }
      if (cell.mean() < previous) monotone = false;
      previous = cell.mean();
      out.cells.push_back(cell);
    }
    out.monotone.emplace_back(delay, monotone);
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "sigma,delay,runs,mean_steady_state,min_steady_state,max_steady_state,faults\n";
  for (const SweepCell& c : result.cells) {
    const auto [lo, hi] = std::minmax_element(c.steady_state.begin(), c.steady_state.end());
    os << format_number(c.sigma) << ',' << c.delay << ',' << c.steady_state.size() << ','
       << format_number(c.mean()) << ',' << format_number(*lo) << ',' << format_number(*hi)
       << ',' << c.faults << '\n';
  }
}

json sweep_json(const SweepResult& result) {
  json cells = json::array();
  for (const SweepCell& c : result.cells) {
    cells.push_back({{"sigma", c.sigma},
                     {"delay", c.delay},
                     {"mean_steady_state", c.mean()},
                     {"steady_state", c.steady_state},
                     {"faults", c.faults}});
  }
  json trend = json::array();
  for (const auto& [delay, ok] : result.monotone) {
    trend.push_back({{"delay", delay}, {"non_decreasing_in_sigma", ok}});
  }
  return {{"pass", result.all_monotone()}, {"cells", cells}, {"trend", trend}};
}

}  // namespace quadchase::tools

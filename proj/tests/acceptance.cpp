// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "quadchase/dynamics.hpp"
#include "quadchase/prediction.hpp"
#include "quadchase/qp.hpp"
#include "quadchase/reference.hpp"
#include "quadchase_tools/config.hpp"
#include "quadchase_tools/suites.hpp"

using namespace quadchase;
using namespace quadchase::tools;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome simulation1() {
  const RunConfig config = default_run_config();
  ScenarioConfig scenario = preset_scenario("sim1", config.scenario);
  const auto start = Clock::now();
  const TrackingMetrics m = compute_metrics(run_scenario(scenario, config.make_controller()));
  const double elapsed = seconds_since(start);
  std::ostringstream os;
  os << "steady_state=" << m.steady_state << " m (<= 0.25), faults=" << m.faults
     << ", runtime=" << elapsed << " s (< 60)";
  return {m.steady_state <= 0.25 && m.faults == 0 && elapsed < 60.0, os.str()};
}

Outcome simulation2() {
  const RunConfig config = default_run_config();
  const auto start = Clock::now();
  double worst = 0.0;
  int faults = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig scenario = preset_scenario("sim2", config.scenario);
    scenario.seed = seed;
    const TrackingMetrics m = compute_metrics(run_scenario(scenario, config.make_controller()));
    worst = std::max(worst, m.outside_reversal_peak);
    faults += m.faults;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream os;
  os << "worst outside-reversal error over seeds 1..10=" << worst << " m (<= 0.30), faults="
     << faults << ", runtime=" << elapsed << " s (< 300)";
  return {worst <= 0.30 && faults == 0 && elapsed < 300.0, os.str()};
}

Outcome from_check(const CheckResult& c, const std::string& detail) {
  return {c.pass, detail + " " + c.details.dump()};
}

Outcome recursive_feasibility() {
  const RunConfig config = default_run_config();
  return from_check(check_recursive_feasibility(config, 100, config.verify.feasibility_duration,
                                                config.verify.seed),
                    "100 runs:");
}

Outcome vehicle_ball() {
  const RunConfig config = default_run_config();
  return from_check(check_vehicle_ball(config, 1000, config.verify.ball_steps,
                                       config.verify.seed),
                    "1000 rollouts:");
}

Outcome terminal_invariance() {
  const RunConfig config = default_run_config();
  const CheckResult conditions = check_conditions(config);
  const CheckResult invariance =
      check_terminal_invariance(config, 1000, config.verify.seed);
  std::ostringstream os;
  os << "conditions all true=" << (conditions.pass ? "yes" : "no")
     << ", 1000 states: " << invariance.details.dump();
  return {conditions.pass && invariance.pass, os.str()};
}

Outcome prediction_sets() {
  const RunConfig config = default_run_config();
  const CheckResult sets = check_prediction_sets(config, 1000, config.verify.seed);
  std::mt19937_64 rng(config.verify.seed);
  double worst_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PredictionSector s = oracle::random_sector(rng);
    const PointEstimate e = chebyshev_center(s);
    const oracle::GridOptimum g = oracle::grid_inradius(s, 500);
    worst_gap = std::max(worst_gap, std::abs(g.depth - e.inradius));
  }
  std::ostringstream os;
  os << "1000 sectors: " << sets.details.dump() << ", max |LP - grid| inradius=" << worst_gap
     << " (<= 1e-3)";
  return {sets.pass && worst_gap <= 1e-3, os.str()};
}

Outcome discretization() {
  const ContinuousModel m = build_continuous(QuadParams{});
  const double dt = MpcConfig{}.dt;
  const DiscreteModel d = discretize(m, dt);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    QuadState x;
    for (int i = 0; i < kStateDim; ++i) x(i) = 2.0 * U(rng);
    const QuadInput u(0.5 * U(rng), 0.5 * U(rng), 9.81 * 0.5 * (1.0 + U(rng)));
    const QuadState ref = oracle::rk4_hold(m, x, u, dt, 1e-5);
    worst = std::max(worst, (step(d, x, u) - ref).lpNorm<Eigen::Infinity>());
  }
  std::ostringstream os;
  os << "100 samples, max |ZOH - RK4|=" << worst << " (<= 1e-8)";
  return {worst <= 1e-8, os.str()};
}

Outcome qp_oracle() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  int not_optimal = 0, oracle_failed = 0, nondeterministic = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + trial % 27;
    const int m = 3 * n;
    Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return N01(rng); });
    const Eigen::MatrixXd H = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd f = Eigen::VectorXd::NullaryExpr(n, [&] { return 5.0 * N01(rng); });
    const Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return N01(rng); });
    const Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(n, [&] { return N01(rng); });
    const Eigen::VectorXd b = A * x0 + Eigen::VectorXd::NullaryExpr(m, [&] { return U(rng); });

    const QpResult r = solve_qp(H, f, A, b);
    const QpResult again = solve_qp(H, f, A, b);
    if (r.status != QpStatus::kOptimal) ++not_optimal;
    if (r.x.size() != again.x.size() ||
        std::memcmp(r.x.data(), again.x.data(), sizeof(double) * r.x.size()) != 0 ||
        r.active != again.active) {
      ++nondeterministic;
    }
    const oracle::QpSolution o =
        oracle::interior_point_qp(H, f, A, b, Eigen::MatrixXd(0, n), Eigen::VectorXd(0), 1e-10);
    if (!o.converged) ++oracle_failed;
    worst = std::max(worst, std::abs(r.objective - o.objective) / (1.0 + std::abs(o.objective)));
  }
  std::ostringstream os;
  os << "100 instances, max relative objective gap=" << worst
     << " (<= 1e-6), not optimal=" << not_optimal << ", oracle unconverged=" << oracle_failed
     << ", rerun mismatches=" << nondeterministic;
  return {worst <= 1e-6 && not_optimal == 0 && oracle_failed == 0 && nondeterministic == 0,
          os.str()};
}

double poly_jerk(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 3; --i) v = v * t + i * (i - 1) * (i - 2) * c[i];
  return v;
}

std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Outcome min_jerk() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> N01;
  auto v3 = [&] { return Eigen::Vector3d(N01(rng), N01(rng), N01(rng)); };
  auto boundary = [](const Eigen::Vector3d& p, const Eigen::Vector3d& v, const Eigen::Vector3d& a) {
    BoundaryState s;
    s.position = p;
    s.velocity = v;
    s.acceleration = a;
    return s;
  };

  double boundary_err = 0.0;
  for (int k = 0; k < 200; ++k) {
    const BoundaryState s = boundary(v3(), v3(), v3());
    const BoundaryState e = boundary(v3(), v3(), v3());
    const double T = 0.2 + 2.0 * std::abs(N01(rng));
    const QuinticSegment seg = fit_min_jerk(s, e, T);
    for (const double err :
         {(seg.position(0) - s.position).norm(), (seg.velocity(0) - s.velocity).norm(),
          (seg.acceleration(0) - s.acceleration).norm(), (seg.position(T) - e.position).norm(),
          (seg.velocity(T) - e.velocity).norm(), (seg.acceleration(T) - e.acceleration).norm()}) {
      boundary_err = std::max(boundary_err, err);
    }
  }

  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  const QuinticSegment unit =
      fit_min_jerk(boundary(zero, zero, zero), boundary({1, 0, 0}, zero, zero), 1.0);
  Eigen::Matrix<double, 6, 1> canonical;
  canonical << 0, 0, 0, 10, -15, 6;
  const double canonical_err = (unit.coeffs[0] - canonical).lpNorm<Eigen::Infinity>();

  // t³ (T - t)³ (a + b t) leaves position, velocity and acceleration fixed at
  // both ends, so every perturbation is boundary-respecting.
  const double T = 1.3;
  const QuinticSegment seg = fit_min_jerk(boundary({0.2, 0, 0}, {0.5, 0, 0}, {-1.0, 0, 0}),
                                          boundary({1.7, 0, 0}, {-0.3, 0, 0}, {0.4, 0, 0}), T);
  const std::vector<double> base(seg.coeffs[0].data(), seg.coeffs[0].data() + 6);
  const double best = oracle::jerk_cost([&](double t) { return poly_jerk(base, t); }, T);
  std::vector<double> bump = {1.0};
  for (int i = 0; i < 3; ++i) bump = multiply(bump, {0.0, 1.0});
  for (int i = 0; i < 3; ++i) bump = multiply(bump, {T, -1.0});
  int beaten = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> p = multiply(bump, {N01(rng), N01(rng)});
    for (std::size_t i = 0; i < base.size(); ++i) p[i] += base[i];
    if (oracle::jerk_cost([&](double t) { return poly_jerk(p, t); }, T) < best - 1e-12) ++beaten;
  }

  std::ostringstream os;
  os << "boundary error=" << boundary_err << " (<= 1e-9), quintic error=" << canonical_err
     << " (<= 1e-9), perturbations with lower jerk=" << beaten << "/200";
  return {boundary_err <= 1e-9 && canonical_err <= 1e-9 && beaten == 0, os.str()};
}

Outcome non_ideality() {
  RunConfig config = default_run_config();
  config.scenario = preset_scenario("sim1", config.scenario);
  config.sweep.sigmas = {0.0, 0.01, 0.02, 0.05};
  config.sweep.delays = {0, 2};
  const SweepResult r = run_sweep(config);
  const auto cell = [&](double sigma, int delay) -> const SweepCell& {
    for (const SweepCell& c : r.cells)
      if (c.sigma == sigma && c.delay == delay) return c;
    throw std::logic_error("missing sweep cell");
  };
  const double clean = cell(0.0, 0).mean();
  const double noisy = cell(0.02, 2).mean();
  std::ostringstream os;
  os << "clean=" << clean << " m, sigma=0.02 delay=2: " << noisy << " m; means by sigma";
  for (int delay : config.sweep.delays) {
    os << " [d=" << delay << ":";
    for (double sigma : config.sweep.sigmas) os << ' ' << cell(sigma, delay).mean();
    os << ']';
  }
  os << ", non-decreasing=" << (r.all_monotone() ? "yes" : "no");
  return {noisy > clean && r.all_monotone(), os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"simulation-1 circular evader", simulation1},
      {"simulation-2 random evader", simulation2},
      {"recursive feasibility", recursive_feasibility},
      {"vehicle ball containment", vehicle_ball},
      {"terminal set invariance", terminal_invariance},
      {"prediction sets and chebyshev center", prediction_sets},
      {"discretization exactness", discretization},
      {"qp oracle equivalence", qp_oracle},
      {"minimum jerk reference", min_jerk},
      {"non-ideality degradation", non_ideality},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "quadchase/defaults.hpp"
#include "quadchase/dynamics.hpp"
#include "quadchase/mpc.hpp"
#include "quadchase/prediction.hpp"
#include "quadchase/qp.hpp"

namespace {

using namespace quadchase;

struct Chase {
  QuadParams params;
  MpcConfig config;
  ChaseSettings settings = default_chase_settings(params);
  Controller controller{params, config, settings};
};

// Hovering quad with the target half a metre away: the terminal set is
// reachable and a handful of constraints end up active.
CftocProblem offset_problem(const Chase& c) {
  const QuadState x0 = hover_state(0.0, 0.0, c.settings.capture_height);
  const std::vector<QuadState> ref(c.config.N + 1,
                                   hover_state(0.4, 0.3, c.settings.capture_height));
  return condense(c.controller.model(), c.config, c.params, x0, ref,
                  c.controller.terminal_at({0.4, 0.3}), c.settings.X, c.settings.U);
}

void BM_Discretize(benchmark::State& state) {
  const ContinuousModel m = build_continuous(QuadParams{});
  for (auto _ : state) benchmark::DoNotOptimize(discretize(m, 0.05));
}
BENCHMARK(BM_Discretize);

void BM_Condense(benchmark::State& state) {
  const Chase c;
  for (auto _ : state) benchmark::DoNotOptimize(offset_problem(c));
}
BENCHMARK(BM_Condense)->Unit(benchmark::kMicrosecond);

void BM_SolveQpCold(benchmark::State& state) {
  const Chase c;
  const CftocProblem p = offset_problem(c);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p));
}
BENCHMARK(BM_SolveQpCold)->Unit(benchmark::kMicrosecond);

void BM_SolveQpWarm(benchmark::State& state) {
  const Chase c;
  const CftocProblem p = offset_problem(c);
  const std::vector<int> hint = solve_qp(p).active;
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p, {}, hint));
}
BENCHMARK(BM_SolveQpWarm)->Unit(benchmark::kMicrosecond);

// One closed-loop control step against a vehicle on a circle, including
// bound updates, prediction, reference generation, condensing and the solve.
void BM_MpcStep(benchmark::State& state) {
  Chase c;
  const double dt = c.config.dt;
  QuadState x = hover_state(1.0, 0.0, c.settings.capture_height);
  int k = 0;
  for (auto _ : state) {
    const double a = 0.5 * k * dt;
    VehicleState v;
    v.x = std::cos(a);
    v.y = std::sin(a);
    v.vx = -0.5 * std::sin(a);
    v.vy = 0.5 * std::cos(a);
    v.heading = std::atan2(v.vx, v.vy);
    const StepDiagnostics d = c.controller.step(k * dt, x, v);
    x = step(c.controller.model(), x, d.command);
    ++k;
    benchmark::DoNotOptimize(d.command);
  }
}
BENCHMARK(BM_MpcStep)->Unit(benchmark::kMicrosecond);

void BM_ChebyshevCenter(benchmark::State& state) {
  VehicleState v;
  v.vx = 0.6;
  v.heading = std::numbers::pi / 2;
  VelocityBounds b;
  const PredictionSector s = predict_sector(v, b, 20, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(chebyshev_center(s));
}
BENCHMARK(BM_ChebyshevCenter)->Unit(benchmark::kMicrosecond);

void BM_ChebyshevCenterWide(benchmark::State& state) {
  PredictionSector s;
  s.radius = 1.0;
  s.theta_hi = 1.9 * std::numbers::pi;
  for (auto _ : state) benchmark::DoNotOptimize(chebyshev_center(s));
}
BENCHMARK(BM_ChebyshevCenterWide)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

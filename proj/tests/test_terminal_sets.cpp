#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "quadchase/linprog.hpp"
#include "quadchase/terminal_sets.hpp"

namespace quadchase {
namespace {

constexpr double kPi = std::numbers::pi;

Polytope state_box() {
  QuadState lo, hi;
  lo << -10, -2.5, -0.5, -5, -10, -2.5, -0.5, -5, 0, -2;
  hi << 10, 2.5, 0.5, 5, 10, 2.5, 0.5, 5, 3, 2;
  return Polytope::box(lo, hi);
}

Polytope input_box(double angle = 0.5) {
  return Polytope::box(Eigen::Vector3d(-angle, -angle, 0.0),
                       Eigen::Vector3d(angle, angle, 2 * 0.5 * 9.81));
}

DiscreteModel model() { return discretize(build_continuous(QuadParams{}), 0.05); }

TEST(BuildBf, Radius) {
  EXPECT_NEAR(build_bf(Eigen::Vector2d(1, 2), 1.0, 10, 0.1).radius, 1.0, 1e-15);
  const Ball2d point = build_bf(Eigen::Vector2d(1, 2), 1.0, 0, 0.1);
  EXPECT_EQ(point.radius, 0.0);
  EXPECT_TRUE(point.contains(Eigen::Vector2d(1, 2), 0.0));
  EXPECT_FALSE(point.contains(Eigen::Vector2d(1, 2.001), 0.0));
  EXPECT_THROW(build_bf(Eigen::Vector2d::Zero(), 0.0, 1, 0.1), std::invalid_argument);
}

TEST(BuildBf, ContainsAdmissibleRollouts) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double V = 1.0, dt = 0.05;
  const int N = 20;
  for (int run = 0; run < 1000; ++run) {
    VehicleState v;
    v.x = 20 * U(rng) - 10;
    v.y = 20 * U(rng) - 10;
    const Ball2d bf = build_bf(v.position(), V, N, dt);
    for (int k = 0; k < N; ++k) {
      const double speed = V * U(rng), a = 2 * kPi * U(rng);
      v = vehicle_step(v, speed * Eigen::Vector2d(std::cos(a), std::sin(a)), dt);
      ASSERT_TRUE(bf.contains(v.position()));
    }
  }
}

TEST(CircumscribingPolygon, ContainsBall) {
  const Ball2d b{Eigen::Vector2d(0.3, -1.0), 1.5};
  const Polytope hull = circumscribing_polygon(b);
  EXPECT_EQ(hull.rows(), kHullSides);
  for (int i = 0; i < 10000; ++i) {
    const double a = 2 * kPi * i / 10000.0;
    EXPECT_TRUE(hull.contains(b.center + b.radius * Eigen::Vector2d(std::cos(a), std::sin(a)), 1e-12));
  }
  // Vertices sit at radius r / cos(pi / sides).
  const double vr = b.radius / std::cos(kPi / kHullSides);
  const double mid = kPi / kHullSides;
  EXPECT_TRUE(hull.contains(b.center + vr * Eigen::Vector2d(std::cos(mid), std::sin(mid)), 1e-9));
  EXPECT_FALSE(hull.contains(b.center + 1.01 * vr * Eigen::Vector2d(std::cos(mid), std::sin(mid))));
}

TEST(TerminalSet, HoverMembership) {
  const VelocityBounds vb;
  const TerminalSet t = build_terminal_set(Eigen::Vector2d(1, 1), vb, state_box(), 20, 0.05, 0.5);
  EXPECT_NEAR(t.ball.radius, 1.0, 1e-12);
  EXPECT_TRUE(t.contains(hover_state(1, 1, 0.25)));
  EXPECT_TRUE(t.contains_hull(hover_state(1, 1, 0.25)));
  EXPECT_FALSE(t.contains(hover_state(1, 1, 1.0)));
  EXPECT_FALSE(t.contains_hull(hover_state(1, 1, 1.0)));
  EXPECT_FALSE(t.contains(hover_state(2.2, 1, 0.25)));
}

TEST(TerminalSet, RejectsDisjointStateSet) {
  QuadState lo = QuadState::Constant(-1), hi = QuadState::Constant(1);
  lo(idx::kZ) = 2.0;
  hi(idx::kZ) = 3.0;
  EXPECT_THROW(build_terminal_set(Eigen::Vector2d::Zero(), VelocityBounds{},
                                  Polytope::box(lo, hi), 20, 0.05, 0.5),
               std::runtime_error);
}

TEST(TerminalSet, ExactAndHullAgreeOutsideSliver) {
  const TerminalSet t =
      build_terminal_set(Eigen::Vector2d(-2, 3), VelocityBounds{}, state_box(), 20, 0.05, 0.5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double outer = t.ball.radius / std::cos(kPi / kHullSides);
  int disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    QuadState x;
    x << -2 + 1.2 * U(rng), 3 * U(rng), 0.6 * U(rng), 6 * U(rng), 3 + 1.2 * U(rng),
        3 * U(rng), 0.6 * U(rng), 6 * U(rng), 0.3 + 0.4 * U(rng), 2.5 * U(rng);
    const bool exact = t.contains(x);
    const bool hull = t.contains_hull(x);
    if (exact) EXPECT_TRUE(hull);
    if (hull && !exact) {
      const double r = (Eigen::Vector2d(x(0), x(4)) - t.ball.center).norm();
      EXPECT_GT(r, t.ball.radius);
      EXPECT_LE(r, outer + 1e-9);
      ++disagreements;
    }
  }
  EXPECT_LT(disagreements, 100);
}

TEST(TerminalController, MovesTowardCenter) {
  const DiscreteModel m = model();
  const QuadState x = hover_state(0.0, 0.0, 0.3);
  const Eigen::Vector2d target(1.0, 0.0);
  const TerminalControllerResult r = terminal_controller(x, target, m, input_box());
  ASSERT_EQ(r.status, TerminalStatus::kOk);
  EXPECT_EQ(r.input(idx::kThrust), 0.0);
  EXPECT_TRUE(input_box().contains(r.input));
  const QuadState next = step(m, x, r.input);
  const Eigen::Vector2d d(next(idx::kX) - x(idx::kX), next(idx::kY) - x(idx::kY));
  EXPECT_GT(d.x(), 0.0);
  EXPECT_NEAR(d.y(), 0.0, 1e-12);
  EXPECT_NEAR(d.norm(), r.displacement, 1e-12);
}

TEST(TerminalController, OverCenterIsDegenerate) {
  const TerminalControllerResult r =
      terminal_controller(hover_state(1, 1, 0.2), Eigen::Vector2d(1, 1), model(), input_box());
  EXPECT_EQ(r.status, TerminalStatus::kDegenerate);
  EXPECT_EQ(r.input, QuadInput::Zero());
}

TEST(TerminalController, InfeasibleWhenDriftPointsAway) {
  QuadState x = hover_state(0, 0, 0.3);
  x(idx::kXDot) = -1.0;
  const TerminalControllerResult r =
      terminal_controller(x, Eigen::Vector2d(1, 0.0), model(), input_box());
  EXPECT_EQ(r.status, TerminalStatus::kInfeasible);
}

TEST(TerminalConditions, DefaultSetConditionsHold) {
  const TerminalConditionsReport r = check_terminal_conditions(model(), state_box(), input_box(), 1.0);
  EXPECT_TRUE(r.displacement_covers_vehicle_step);
  EXPECT_TRUE(r.input_set_has_interior);
  EXPECT_TRUE(r.set_conditions());
  EXPECT_EQ(r.samples, 1000);
  EXPECT_LE(r.delta_x.lo, -0.05);
  EXPECT_GE(r.delta_x.hi, 0.05);
}

TEST(TerminalConditions, FreeFallBreaksCondition2) {
  // Zero thrust lowers z_dot by g dt in one step, so every terminal state
  // with z_dot below -2 + g dt leaves the z_dot box whatever the attitude
  // command. That slab alone is (g dt) / 4 of the uniform z_dot range.
  const double slab = 9.81 * 0.05 / 4.0;
  const TerminalConditionsReport r = check_terminal_conditions(model(), state_box(), input_box(), 1.0);
  EXPECT_FALSE(r.successor_stays_admissible);
  EXPECT_GE(r.successor_violations, static_cast<int>(0.8 * slab * r.samples));
  ASSERT_TRUE(r.violation_witness.has_value());

  QuadState falling = hover_state(0.0, 0.0, 0.25);
  falling(idx::kZDot) = -1.9;
  const QuadState next = step(model(), falling, QuadInput(0.0, 0.0, 0.0));
  EXPECT_NEAR(next(idx::kZDot), -1.9 - 9.81 * 0.05, 1e-12);
  EXPECT_FALSE(state_box().contains(next));
}

TEST(TerminalConditions, Condition1SupportMatchesBoxArithmetic) {
  // For boxes the support function is the sum of |coefficient| * half-width
  // about the box center.
  const DiscreteModel m = model();
  const TerminalConditionsReport r = check_terminal_conditions(m, state_box(), input_box(), 1.0);
  const Polytope X = state_box();
  QuadState lo, hi;
  lo << -10, -2.5, -0.5, -5, -10, -2.5, -0.5, -5, 0, -2;
  hi << 10, 2.5, 0.5, 5, 10, 2.5, 0.5, 5, 3, 2;
  double up = 0.0, down = 0.0;
  for (int j = 0; j < kStateDim; ++j) {
    const double c = m.A(0, j) - (j == 0 ? 1.0 : 0.0);
    up += std::max(c * lo(j), c * hi(j));
    down += std::min(c * lo(j), c * hi(j));
  }
  const double b = m.B(0, 0);
  up += std::abs(b) * 0.5;
  down -= std::abs(b) * 0.5;
  EXPECT_NEAR(r.delta_x.hi, up, 1e-9);
  EXPECT_NEAR(r.delta_x.lo, down, 1e-9);
}

TEST(TerminalConditions, Condition1FailsWhenInputsAndVelocitiesShrink) {
  // With the velocity box tight, the attitude commands carry the step; a
  // 100x smaller command box can no longer cover V_bar * dt.
  QuadState lo, hi;
  lo << -10, -0.01, -0.002, -0.01, -10, -0.01, -0.002, -0.01, 0, -2;
  hi << 10, 0.01, 0.002, 0.01, 10, 0.01, 0.002, 0.01, 3, 2;
  const Polytope X = Polytope::box(lo, hi);
  const DiscreteModel m = discretize(build_continuous(QuadParams{}), 0.5);
  const TerminalConditionsReport wide = check_terminal_conditions(m, X, input_box(0.5), 0.2);
  EXPECT_TRUE(wide.displacement_covers_vehicle_step);
  const TerminalConditionsReport tiny = check_terminal_conditions(m, X, input_box(0.005), 0.2);
  EXPECT_FALSE(tiny.displacement_covers_vehicle_step);
  EXPECT_LT(tiny.delta_x.hi, tiny.required_step);
}

TEST(TerminalConditions, PointInputSetHasNoInterior) {
  const Polytope origin = Polytope::box(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero());
  const TerminalConditionsReport r = check_terminal_conditions(model(), state_box(), origin, 1.0,
                                                 TerminalConditionsOptions{.samples = 10});
  EXPECT_FALSE(r.input_set_has_interior);
  EXPECT_FALSE(r.all());
}

// 1-D double integrator toy for the set recursions.
struct Toy {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;
  Eigen::Vector2d G = Eigen::Vector2d::Zero();
  Polytope X = Polytope::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  Polytope U = Polytope::box(Eigen::VectorXd::Constant(1, -1), Eigen::VectorXd::Constant(1, 1));
  Toy() {
    const double dt = 0.5;
    A << 1, dt, 0, 1;
    B << dt * dt / 2, dt;
  }
};

TEST(PreSet, MatchesGridEnumeration) {
  const Toy toy;
  const Polytope target = Polytope::box(Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.5, 0.5));
  const Polytope pre = pre_set(toy.A, toy.B, toy.G, target, toy.U);
  int checked = 0;
  for (int i = 0; i <= 80; ++i) {
    for (int j = 0; j <= 80; ++j) {
      const Eigen::Vector2d x(-2 + 4.0 * i / 80, -2 + 4.0 * j / 80);
      bool reach = false;
      for (int k = 0; k <= 2000 && !reach; ++k) {
        const double u = -1 + 2.0 * k / 2000;
        reach = target.contains(toy.A * x + toy.B * u + toy.G, 0.0);
      }
      // Skip the grid-resolution band around the boundary.
      const double margin = (pre.normalized().A() * x - pre.normalized().b()).maxCoeff();
      if (std::abs(margin) < 2e-3) continue;
      EXPECT_EQ(pre.contains(x), reach) << x.transpose();
      ++checked;
    }
  }
  EXPECT_GT(checked, 6000);
}

TEST(PreSet, MembershipEqualsInputLp) {
  const Toy toy;
  const Polytope target = Polytope::box(Eigen::Vector2d(-0.3, -0.2), Eigen::Vector2d(0.6, 0.4));
  const Polytope pre = pre_set(toy.A, toy.B, toy.G, target, toy.U);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int s = 0; s < 500; ++s) {
    const Eigen::Vector2d x(U(rng), U(rng));
    // {u : H (A x + B u + G) <= h, u in U}
    const Eigen::MatrixXd Hu = target.A() * toy.B;
    Eigen::MatrixXd A(Hu.rows() + toy.U.rows(), 1);
    A << Hu, toy.U.A();
    Eigen::VectorXd b(A.rows());
    b << target.b() - target.A() * (toy.A * x + toy.G), toy.U.b();
    const bool feasible =
        lp_maximize(Eigen::VectorXd::Zero(1), A, b).status == LpStatus::kOptimal;
    const double margin = (pre.normalized().A() * x - pre.normalized().b()).maxCoeff();
    if (std::abs(margin) < 1e-9) continue;
    EXPECT_EQ(pre.contains(x), feasible);
  }
}

TEST(BackwardReachable, GrowsForInvariantTarget) {
  const Toy toy;
  const Polytope target = Polytope::box(Eigen::Vector2d(-0.5, -0.05), Eigen::Vector2d(0.5, 0.05));
  Polytope prev = target;
  for (int n = 1; n <= 5; ++n) {
    const Polytope k = backward_reachable(toy.A, toy.B, toy.G, target, toy.X, toy.U, n);
    EXPECT_TRUE(contains_polytope(k, prev, 1e-9)) << n;
    prev = k;
  }
}

TEST(BackwardReachable, OneStepFromWholeSet) {
  const Toy toy;
  const Polytope k = backward_reachable(toy.A, toy.B, toy.G, toy.X, toy.X, toy.U, 1);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int s = 0; s < 500; ++s) {
    const Eigen::Vector2d x(U(rng), U(rng));
    bool ok = false;
    for (int j = 0; j <= 200 && !ok; ++j) ok = toy.X.contains(toy.A * x + toy.B * (-1 + j / 100.0), 0.0);
    if (ok) EXPECT_TRUE(k.contains(x));
  }
  EXPECT_THROW(backward_reachable(toy.A, toy.B, toy.G, toy.X, toy.X, toy.U, 0),
               std::invalid_argument);
}

TEST(Project, BoxCoordinates) {
  const Polytope p = project(state_box(), {idx::kZDot, idx::kXDot});
  ASSERT_EQ(p.dim(), 2);
  EXPECT_NEAR(*p.support(Eigen::Vector2d(1, 0)), 2.0, 1e-12);
  EXPECT_NEAR(*p.support(Eigen::Vector2d(0, 1)), 2.5, 1e-12);
}

TEST(FeasibleStartSet, ContainsHoverAboveTargetAndLiesInX) {
  const DiscreteModel m = model();
  const int N = 20;
  const TerminalSet t =
      build_terminal_set(Eigen::Vector2d(0.5, -0.5), VelocityBounds{}, state_box(), N, 0.05, 0.5);
  const FeasibleStartSet f = build_feasible_start_set(m, t, state_box(), input_box(), N);
  EXPECT_TRUE(f.contains(hover_state(0.5, -0.5, 0.25)));
  EXPECT_FALSE(f.contains(hover_state(5.0, -0.5, 0.25)));
  std::mt19937_64 rng(3);
  for (int s = 0; s < 50; ++s) {
    const auto x = f.sample(rng);
    ASSERT_TRUE(x.has_value());
    EXPECT_TRUE(f.contains(*x));
    EXPECT_TRUE(state_box().contains(*x));
  }
}

TEST(FeasibleStartSet, RejectsCoupledConstraints) {
  const DiscreteModel m = model();
  const TerminalSet t =
      build_terminal_set(Eigen::Vector2d::Zero(), VelocityBounds{}, state_box(), 5, 0.05, 0.5);
  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, kStateDim);
  row(0, idx::kX) = 1.0;
  row(0, idx::kY) = 1.0;
  const Polytope coupled = state_box().intersect(Polytope(row, Eigen::VectorXd::Constant(1, 15.0)));
  EXPECT_THROW(build_feasible_start_set(m, t, coupled, input_box(), 5), std::invalid_argument);
}

}  // namespace
}  // namespace quadchase

namespace quadchase {
namespace {

// The lifted representation and the Fourier-Motzkin recursion describe the
// same set; compare support values of the projection.
double lifted_support(const ReachableChannel& c, const Eigen::VectorXd& d) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(c.lifted.dim());
  full.head(d.size()) = d;
  return *c.lifted.support(full);
}

TEST(ReachableChannel, AgreesWithPreSetRecursion) {
  const DiscreteModel m = model();
  const Subsystem sub = extract_subsystem(m, Channel::kLongitudinal);
  const Polytope X = Polytope::box(Eigen::Vector4d(-10, -2.5, -0.5, -5),
                                   Eigen::Vector4d(10, 2.5, 0.5, 5));
  const Polytope target = X.intersect(Polytope::box(Eigen::Vector4d(-0.7, -2.5, -0.5, -5),
                                                    Eigen::Vector4d(0.7, 2.5, 0.5, 5)));
  const Polytope U = Polytope::box(Eigen::VectorXd::Constant(1, -0.5),
                                   Eigen::VectorXd::Constant(1, 0.5));
  const int N = 3;
  const Polytope fm = backward_reachable(sub.A, sub.B, sub.G, target, X, U, N);
  const ReachableChannel lifted = reachable_channel(sub, target, X, U, N);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N01;
  for (int k = 0; k < 50; ++k) {
    Eigen::Vector4d d(N01(rng), N01(rng), N01(rng), N01(rng));
    EXPECT_NEAR(*fm.support(d), lifted_support(lifted, d), 1e-7);
  }
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    Eigen::Vector4d x;
    for (int i = 0; i < 4; ++i) x(i) = lifted.lower(i) + (lifted.upper(i) - lifted.lower(i)) * U01(rng);
    const double margin = (fm.normalized().A() * x - fm.normalized().b()).maxCoeff();
    if (std::abs(margin) < 1e-7) continue;
    EXPECT_EQ(lifted.contains(x), fm.contains(x));
  }
}

TEST(ReachableChannel, ToyAgreesWithPreSetRecursion) {
  const Toy toy;
  const Polytope target = Polytope::box(Eigen::Vector2d(-0.5, -0.05), Eigen::Vector2d(0.5, 0.05));
  Subsystem sub;
  sub.A = toy.A;
  sub.B = toy.B;
  sub.G = toy.G;
  sub.state_indices = Eigen::Vector2i(0, 1);
  for (int N = 1; N <= 6; ++N) {
    const Polytope fm = backward_reachable(toy.A, toy.B, toy.G, target, toy.X, toy.U, N);
    const ReachableChannel lifted = reachable_channel(sub, target, toy.X, toy.U, N);
    for (int k = 0; k < 16; ++k) {
      const double a = 2 * kPi * k / 16;
      const Eigen::Vector2d d(std::cos(a), std::sin(a));
      EXPECT_NEAR(*fm.support(d), lifted_support(lifted, d), 1e-9) << N;
    }
  }
}

}  // namespace
}  // namespace quadchase

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "quadchase/evader.hpp"

namespace quadchase {
namespace {

constexpr double kPi = std::numbers::pi;

VehicleState moving(double vx, double vy, double heading) {
  VehicleState s;
  s.vx = vx;
  s.vy = vy;
  s.heading = heading;
  return s;
}

TEST(VehicleStep, AdvancesPosition) {
  const VehicleState s = vehicle_step(VehicleState{}, Eigen::Vector2d(1.0, 0.0), 0.1);
  EXPECT_DOUBLE_EQ(s.x, 0.1);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
  EXPECT_DOUBLE_EQ(s.vx, 1.0);
  const VehicleState t = vehicle_step(s, Eigen::Vector2d::Zero(), 0.1);
  EXPECT_EQ(t.position(), s.position());
  EXPECT_THROW(vehicle_step(s, Eigen::Vector2d::Zero(), 0.0), std::invalid_argument);
}

TEST(VehicleStep, DisplacementBoundedBySpeed) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const double V = 1.0, dt = 0.05;
  const int N = 20;
  VehicleState s;
  for (int k = 0; k < N; ++k) {
    const double a = ang(rng);
    s = vehicle_step(s, V * Eigen::Vector2d(std::cos(a), std::sin(a)), dt);
  }
  EXPECT_LE(s.position().norm(), N * dt * V + 1e-12);
  VehicleState straight;
  for (int k = 0; k < N; ++k) straight = vehicle_step(straight, Eigen::Vector2d(V, 0.0), dt);
  EXPECT_NEAR(straight.position().norm(), N * dt * V, 1e-12);
}

TEST(BodyFrame, PrintedExamples) {
  BodyVelocity a = body_frame_velocity(moving(1.0, 0.0, 0.0));
  EXPECT_NEAR(a.slip, kPi / 2, 1e-15);
  EXPECT_NEAR(a.body(0), 1.0, 1e-15);
  EXPECT_NEAR(a.body(1), 0.0, 1e-15);
  BodyVelocity b = body_frame_velocity(moving(0.0, 1.0, 0.0));
  EXPECT_NEAR(b.slip, 0.0, 1e-15);
  EXPECT_NEAR(b.body(1), 1.0, 1e-15);
  BodyVelocity c = body_frame_velocity(moving(0.0, 0.0, 0.3));
  EXPECT_TRUE(c.stationary);
  EXPECT_EQ(c.speed, 0.0);
  EXPECT_EQ(c.slip, 0.0);
}

TEST(BodyFrame, InverseRotationRecoversGroundVelocity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const VehicleState s = moving(U(rng), U(rng), wrap_angle(ang(rng)));
    const BodyVelocity bv = body_frame_velocity(s);
    if (bv.stationary) continue;
    const Eigen::Vector2d g = ground_velocity(bv.speed, bv.slip, s.heading);
    EXPECT_NEAR(g(0), s.vx, 1e-12);
    EXPECT_NEAR(g(1), s.vy, 1e-12);
    // Rotating the body vector by the heading gives the same answer.
    const double h = s.heading;
    const Eigen::Vector2d rot(bv.body(0) * std::cos(h) + bv.body(1) * std::sin(h),
                              -bv.body(0) * std::sin(h) + bv.body(1) * std::cos(h));
    EXPECT_NEAR(rot(0), s.vx, 1e-12);
    EXPECT_NEAR(rot(1), s.vy, 1e-12);
  }
}

TEST(WrapAngle, HalfOpenRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
}

TEST(History, WindowAndOrdering) {
  EvaderHistory h(3);
  for (int i = 0; i < 5; ++i) h.push(0.1 * i, VehicleState{});
  EXPECT_EQ(h.size(), 3u);
  EXPECT_DOUBLE_EQ(h.samples().front().t, 0.2);
  EXPECT_THROW(h.push(0.4, VehicleState{}), std::invalid_argument);
  EXPECT_THROW(EvaderHistory(0), std::invalid_argument);
}

VelocityBounds priors(double beta) {
  return VelocityBounds::from_priors(1.0, -0.3, 0.3, beta, beta, beta);
}

EvaderHistory constant_history(double speed, double slip, int n = 10) {
  EvaderHistory h(20);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d v = ground_velocity(speed, slip, 0.2);
    h.push(0.05 * i, moving(v(0), v(1), 0.2));
  }
  return h;
}

TEST(UpdateBounds, ZeroWeightsRevertToPriors) {
  const VelocityBounds b = update_bounds(priors(0.0), constant_history(0.4, 0.1));
  EXPECT_DOUBLE_EQ(b.v_bar, 1.0);
  EXPECT_DOUBLE_EQ(b.delta_lo, -0.3);
  EXPECT_DOUBLE_EQ(b.delta_hi, 0.3);
}

TEST(UpdateBounds, PureSample) {
  const VelocityBounds b = update_bounds(priors(1.0), constant_history(0.4, 0.1));
  EXPECT_NEAR(b.v_bar, 0.4, 1e-12);
  EXPECT_NEAR(b.delta_lo, 0.1, 1e-12);
  EXPECT_NEAR(b.delta_hi, 0.1, 1e-12);
}

TEST(UpdateBounds, HalfWeight) {
  VelocityBounds p = priors(0.5);
  const VelocityBounds b = update_bounds(p, constant_history(0.4, 0.0));
  EXPECT_NEAR(b.v_bar, 0.7, 1e-12);
  EXPECT_NEAR(b.delta_lo, -0.15, 1e-12);
  EXPECT_NEAR(b.delta_hi, 0.15, 1e-12);
}

TEST(UpdateBounds, CircularMeanAcrossWrap) {
  EvaderHistory h(20);
  // Slips of +-(pi - 0.1) average to pi, not 0.
  const double s = kPi - 0.1;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d v = ground_velocity(0.5, i % 2 ? s : -s, 0.0);
    h.push(0.05 * i, moving(v(0), v(1), 0.0));
  }
  VelocityBounds p = VelocityBounds::from_priors(1.0, -kPi, kPi, 0.0, 1.0, 1.0);
  const VelocityBounds b = update_bounds(p, h);
  EXPECT_NEAR(std::abs(b.delta_hi), kPi, 1e-9);
}

TEST(UpdateBounds, ClampAndSwap) {
  // Speeds above the prior (noise) are clamped to V_bar.
  const VelocityBounds b = update_bounds(priors(1.0), constant_history(1.3, 0.0));
  EXPECT_DOUBLE_EQ(b.v_bar, 1.0);
  // Asymmetric weights can cross the slip bounds; they come back ordered.
  VelocityBounds p = VelocityBounds::from_priors(1.0, -0.3, 0.3, 0.5, 1.0, 0.0);
  const VelocityBounds c = update_bounds(p, constant_history(0.5, 0.5));
  EXPECT_LE(c.delta_lo, c.delta_hi);
  EXPECT_NEAR(c.delta_lo, 0.3, 1e-12);
  EXPECT_NEAR(c.delta_hi, 0.5, 1e-12);
}

TEST(UpdateBounds, MonotoneAndIdempotent) {
  const VelocityBounds p = priors(0.7);
  double prev = -1.0;
  for (double v : {0.1, 0.3, 0.5, 0.9}) {
    const VelocityBounds b = update_bounds(p, constant_history(v, 0.0));
    EXPECT_GT(b.v_bar, prev);
    prev = b.v_bar;
  }
  const EvaderHistory h = constant_history(0.4, 0.2);
  const VelocityBounds b1 = update_bounds(p, h);
  const VelocityBounds b2 = update_bounds(p, h);
  EXPECT_EQ(b1.v_bar, b2.v_bar);
  EXPECT_EQ(b1.delta_lo, b2.delta_lo);
  EXPECT_THROW(update_bounds(p, EvaderHistory(5)), std::invalid_argument);
}

TEST(UpdateBounds, BoundsMoveTowardSampleMean) {
  const EvaderHistory h = constant_history(0.5, 0.1);
  double gap_lo = 1e9, gap_hi = 1e9;
  for (double beta : {0.0, 0.3, 0.6, 0.9, 1.0}) {
    const VelocityBounds b = update_bounds(priors(beta), h);
    EXPECT_LE(std::abs(b.delta_lo - 0.1), gap_lo + 1e-15);
    EXPECT_LE(std::abs(b.delta_hi - 0.1), gap_hi + 1e-15);
    gap_lo = std::abs(b.delta_lo - 0.1);
    gap_hi = std::abs(b.delta_hi - 0.1);
  }
}

TEST(VelocityBounds, Validation) {
  EXPECT_THROW(VelocityBounds::from_priors(0.0, -0.3, 0.3, 0.5, 0.5, 0.5),
               std::invalid_argument);
  EXPECT_THROW(VelocityBounds::from_priors(1.0, 0.3, -0.3, 0.5, 0.5, 0.5),
               std::invalid_argument);
  EXPECT_THROW(VelocityBounds::from_priors(1.0, -0.3, 0.3, 1.5, 0.5, 0.5),
               std::invalid_argument);
}

}  // namespace
}  // namespace quadchase

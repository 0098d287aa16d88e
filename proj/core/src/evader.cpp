#include "quadchase/evader.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quadchase {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a > std::numbers::pi) a -= kTwoPi;
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

VehicleState vehicle_step(const VehicleState& state, const Eigen::Vector2d& u,
                          double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("vehicle_step: dt must be positive");
  VehicleState next = state;
  next.x += dt * u.x();
  next.y += dt * u.y();
  next.vx = u.x();
  next.vy = u.y();
  return next;
}

BodyVelocity body_frame_velocity(const VehicleState& sample) {
  BodyVelocity out;
  const double speed = std::hypot(sample.vx, sample.vy);
  if (speed < kStationarySpeed) {
    out.stationary = true;
    return out;
  }
  out.speed = speed;
  out.slip = wrap_angle(std::atan2(sample.vx, sample.vy) - sample.heading);
  out.body = speed * Eigen::Vector2d(std::sin(out.slip), std::cos(out.slip));
  return out;
}

Eigen::Vector2d ground_velocity(double speed, double slip, double heading) {
  const double bearing = heading + slip;
  return speed * Eigen::Vector2d(std::sin(bearing), std::cos(bearing));
}

VelocityBounds VelocityBounds::from_priors(double V_bar, double Theta_lo,
                                           double Theta_hi, double beta_v,
                                           double beta_lo, double beta_hi) {
  VelocityBounds b;
  b.V_bar = V_bar;
  b.Theta_lo = Theta_lo;
  b.Theta_hi = Theta_hi;
  b.v_bar = V_bar;
  b.delta_lo = Theta_lo;
  b.delta_hi = Theta_hi;
  b.beta_v = beta_v;
  b.beta_lo = beta_lo;
  b.beta_hi = beta_hi;
  b.validate();
  return b;
}

void VelocityBounds::validate() const {
  auto in_unit = [](double w) { return w >= 0.0 && w <= 1.0; };
  if (!(V_bar > 0.0)) throw std::invalid_argument("VelocityBounds: V_bar must be positive");
  if (!(Theta_lo <= Theta_hi)) {
    throw std::invalid_argument("VelocityBounds: Theta_lo > Theta_hi");
  }
  if (!in_unit(beta_v) || !in_unit(beta_lo) || !in_unit(beta_hi)) {
    throw std::invalid_argument("VelocityBounds: EMA weights must lie in [0, 1]");
  }
}

EvaderHistory::EvaderHistory(std::size_t window) : window_(window) {
  if (window_ == 0) throw std::invalid_argument("EvaderHistory: window must be >= 1");
}

void EvaderHistory::push(double t, const VehicleState& state) {
  if (!samples_.empty() && !(t > samples_.back().t)) {
    throw std::invalid_argument("EvaderHistory: timestamps must strictly increase");
  }
  samples_.push_back({t, state});
  while (samples_.size() > window_) samples_.pop_front();
}

VelocityBounds update_bounds(const VelocityBounds& bounds,
                             const EvaderHistory& history) {
  if (history.empty()) throw std::invalid_argument("update_bounds: empty history");

  double speed_sum = 0.0;
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  for (const auto& s : history.samples()) {
    const BodyVelocity bv = body_frame_velocity(s.state);
    speed_sum += bv.speed;
    sin_sum += std::sin(bv.slip);
    cos_sum += std::cos(bv.slip);
  }
  const auto n = static_cast<double>(history.size());
  const double mean_speed = speed_sum / n;
  // Circular mean; slips straddling ±pi would otherwise average to ~0.
  const double mean_slip =
      (sin_sum == 0.0 && cos_sum == 0.0) ? 0.0 : std::atan2(sin_sum, cos_sum);

  VelocityBounds out = bounds;
  out.v_bar = bounds.V_bar * (1.0 - bounds.beta_v) + bounds.beta_v * mean_speed;
  out.delta_lo = bounds.Theta_lo * (1.0 - bounds.beta_lo) + bounds.beta_lo * mean_slip;
  out.delta_hi = bounds.Theta_hi * (1.0 - bounds.beta_hi) + bounds.beta_hi * mean_slip;

  // Noisy speeds can push the mean above the prior; keep v_bar in [0, V_bar]
  // so the prediction set stays inside the terminal ball.
  out.v_bar = std::clamp(out.v_bar, 0.0, bounds.V_bar);
  if (out.delta_lo > out.delta_hi) std::swap(out.delta_lo, out.delta_hi);
  return out;
}

}  // namespace quadchase

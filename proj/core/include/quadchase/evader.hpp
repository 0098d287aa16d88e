#pragma once

#include <cstddef>
#include <deque>

#include <Eigen/Core>

namespace quadchase {

/// Ground vehicle sample. Heading is a bearing measured from the +y axis
/// toward +x, so a vehicle with heading h and zero slip moves along
/// (sin h, cos h).
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double heading = 0.0;

  Eigen::Vector2d position() const { return {x, y}; }
  Eigen::Vector2d velocity() const { return {vx, vy}; }
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Integrates the point-mass model one step with ground velocity u. The
/// heading is left untouched; it is a measured quantity.
VehicleState vehicle_step(const VehicleState& state, const Eigen::Vector2d& u,
                          double dt);

inline constexpr double kStationarySpeed = 1e-3;

struct BodyVelocity {
  double speed = 0.0;
  double slip = 0.0;
  Eigen::Vector2d body = Eigen::Vector2d::Zero();
  bool stationary = false;
};

/// Speed and slip of a sample. slip = bearing(v) - heading, with the bearing
/// taken full-quadrant from the +y axis; body = speed * (sin slip, cos slip).
/// Below kStationarySpeed returns the stationary result (0, 0).
BodyVelocity body_frame_velocity(const VehicleState& sample);

/// Inverse of body_frame_velocity: ground velocity from speed, slip and
/// heading.
Eigen::Vector2d ground_velocity(double speed, double slip, double heading);

struct VelocityBounds {
  // Priors.
  double V_bar = 1.0;
  double Theta_lo = -0.3;
  double Theta_hi = 0.3;
  // Updated bounds.
  double v_bar = 1.0;
  double delta_lo = -0.3;
  double delta_hi = 0.3;
  // EMA weights.
  double beta_v = 0.7;
  double beta_lo = 0.7;
  double beta_hi = 0.7;

  /// Bounds equal to the priors.
  static VelocityBounds from_priors(double V_bar, double Theta_lo,
                                    double Theta_hi, double beta_v,
                                    double beta_lo, double beta_hi);

  /// Throws std::invalid_argument on inconsistent priors or weights.
  void validate() const;
};

struct HistorySample {
  double t = 0.0;
  VehicleState state;
};

/// Sliding window over the last L vehicle samples.
class EvaderHistory {
 public:
  explicit EvaderHistory(std::size_t window = 20);

  /// Throws std::invalid_argument if t does not strictly increase.
  void push(double t, const VehicleState& state);
  void clear() { samples_.clear(); }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t window() const { return window_; }
  const std::deque<HistorySample>& samples() const { return samples_; }
  const HistorySample& latest() const { return samples_.back(); }

 private:
  std::size_t window_;
  std::deque<HistorySample> samples_;
};

/// Exponential-moving-average update of the speed and slip bounds from the
/// window means. Throws std::invalid_argument on an empty history.
VelocityBounds update_bounds(const VelocityBounds& bounds,
                             const EvaderHistory& history);

}  // namespace quadchase

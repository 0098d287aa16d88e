#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "quadchase/dynamics.hpp"
#include "quadchase/prediction.hpp"

namespace quadchase {

/// Position, velocity and acceleration of one boundary of a segment.
struct BoundaryState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
};

/// Per-axis quintic p(t) = sum_i c_i t^i on [0, duration].
struct QuinticSegment {
  std::array<Eigen::Matrix<double, 6, 1>, 3> coeffs;
  double duration = 0.0;

  Eigen::Vector3d position(double t) const { return derivative(t, 0); }
  Eigen::Vector3d velocity(double t) const { return derivative(t, 1); }
  Eigen::Vector3d acceleration(double t) const { return derivative(t, 2); }
  Eigen::Vector3d jerk(double t) const { return derivative(t, 3); }
  Eigen::Vector3d derivative(double t, int order) const;
};

/// Minimum-jerk segment: the quintic through both boundary triples.
/// Throws std::invalid_argument unless T_seg > 0.
QuinticSegment fit_min_jerk(const BoundaryState& start, const BoundaryState& end,
                            double T_seg);

/// How reference attitudes are synthesized.
enum class AngleMode {
  kFlat,  ///< from the reference accelerations (ẍ = gθ, ÿ = -gφ)
  kZero,  ///< all reference angles and rates zero
};

/// N + 1 reference states at t = k dt. The last one always has zero angles
/// and rates. Throws std::invalid_argument if N dt exceeds the segment.
std::vector<QuadState> sample_reference(const QuinticSegment& seg, int N, double dt,
                                        const QuadParams& params,
                                        AngleMode mode = AngleMode::kFlat);

/// Segment from the current quad state to height H above the estimate,
/// arriving with the vehicle's ground velocity and zero acceleration, over
/// T_seg = N dt; then sampled.
std::vector<QuadState> make_reference(const QuadState& current, const PointEstimate& estimate,
                                      const Eigen::Vector2d& vehicle_velocity, double H,
                                      int N, double dt, const QuadParams& params,
                                      AngleMode mode = AngleMode::kFlat);

}  // namespace quadchase

#pragma once

#include <vector>

#include <Eigen/Core>

#include "quadchase/evader.hpp"

namespace quadchase {

/// Convex prediction set: the circular sector of `radius` about `center`
/// swept counterclockwise from theta_lo to theta_hi (math angles from +x),
/// united with the triangle (center, lower end, upper end). When the sweep
/// exceeds pi the union is the circular segment cut off by the chord.
struct PredictionSector {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;

  double span() const { return theta_hi - theta_lo; }
  Eigen::Vector2d lower_end() const;
  Eigen::Vector2d upper_end() const;
};

struct PointEstimate {
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double inradius = 0.0;
};

enum class Extremal { kLower, kUpper };

/// N + 1 positions under constant speed v_bar and slip delta_lo (kLower) or
/// delta_hi (kUpper), heading frozen at the measured value.
std::vector<Eigen::Vector2d> propagate_extremal(const VehicleState& start,
                                                const VelocityBounds& bounds,
                                                int N, double dt, Extremal which);

/// Sector from the two extremal endpoints. theta_lo is the full-quadrant
/// bearing of lower_end - start and the sweep runs counterclockwise to
/// upper_end. Coincident bearings resolve to a full turn when the slip
/// bounds span more than pi, and to a radial segment otherwise.
PredictionSector build_sector(const Eigen::Vector2d& start,
                              const Eigen::Vector2d& lower_end,
                              const Eigen::Vector2d& upper_end,
                              const VelocityBounds& bounds, int N, double dt);

/// Both extremal rollouts plus build_sector. Slip grows clockwise (it is a
/// bearing offset), so the upper-slip rollout bounds the sector from the
/// clockwise side.
PredictionSector predict_sector(const VehicleState& start,
                                const VelocityBounds& bounds, int N, double dt);

/// Exact membership in the sector-plus-triangle union.
bool contains(const PredictionSector& sector, const Eigen::Vector2d& p,
              double tol = 1e-9);

/// Distance from an interior point to the boundary of the set.
double boundary_distance(const PredictionSector& sector, const Eigen::Vector2d& p);

inline constexpr int kArcChords = 64;
/// Largest gap between the arc and its chords; wide sectors get more than
/// kArcChords chords to stay under it.
inline constexpr double kArcSagitta = 1e-4;

/// Chords used for the arc: at least kArcChords, and enough that each
/// chord's sagitta is at most kArcSagitta.
int arc_chords(const PredictionSector& sector);

/**
 * Center of the largest inscribed disk.
 *
 * The arc is replaced by arc_chords() inscribed chords and the center is
 * the LP optimum over that polygon, so it always lies inside the true set. The
 * reported inradius is the exact distance from that center to the true
 * boundary. Degenerate sectors return the segment midpoint with inradius 0.
 */
PointEstimate chebyshev_center(const PredictionSector& sector);

}  // namespace quadchase

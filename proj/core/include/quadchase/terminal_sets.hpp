#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "quadchase/dynamics.hpp"
#include "quadchase/evader.hpp"
#include "quadchase/polytope.hpp"

namespace quadchase {

struct Ball2d {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;

  bool contains(const Eigen::Vector2d& p, double tol = 1e-9) const {
    return (p - center).norm() <= radius + tol;
  }
};

/// Disk of radius V_bar * N * dt about the vehicle position. N = 0 gives the
/// single point X_c.
Ball2d build_bf(const Eigen::Vector2d& X_c, double V_bar, int N, double dt);

inline constexpr int kHullSides = 16;

/// Regular polygon circumscribing the disk (tangent-line inequalities).
Polytope circumscribing_polygon(const Ball2d& ball, int sides = kHullSides);

struct TerminalSet {
  Ball2d ball;
  double capture_height = 0.0;
  Polytope velocity_box;    ///< over (ẋ, ẏ, ż)
  Polytope rotational_box;  ///< over (θ, θ̇, φ, φ̇)
  Polytope polyhedral_hull; ///< over (x, y)
  Polytope state_polytope;  ///< the full admissible state set

  /// Exact membership with the disk.
  bool contains(const QuadState& x, double tol = 1e-9) const;
  /// Membership with the disk replaced by its polygon.
  bool contains_hull(const QuadState& x, double tol = 1e-9) const;
  /// The hull version as a polytope over the full state.
  Polytope hull_polytope() const;
};

/// Terminal set at vehicle position X_c. Throws std::runtime_error when the
/// result does not intersect the state set.
TerminalSet build_terminal_set(const Eigen::Vector2d& X_c, const VelocityBounds& bounds,
                               const Polytope& state_polytope, int N, double dt,
                               double H);

enum class TerminalStatus { kOk, kDegenerate, kInfeasible };

const char* to_string(TerminalStatus status);

struct TerminalControllerResult {
  QuadInput input = QuadInput::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();
  /// Length of the one-step horizontal displacement along `direction`.
  double displacement = 0.0;
  TerminalStatus status = TerminalStatus::kInfeasible;
};

/// [e1 e5]ᵀ B_T [e1 e2]: horizontal response to the two attitude commands.
Eigen::Matrix2d horizontal_input_gain(const DiscreteModel& model);

/**
 * Attitude command with zero thrust whose one-step horizontal displacement
 * points at X_c, choosing the longest such displacement (an LP along the
 * ray). Over X_c the direction is undefined and the zero input is returned
 * with kDegenerate. kInfeasible means no admissible command moves the quad
 * along that ray this step.
 */
TerminalControllerResult terminal_controller(const QuadState& x,
                                             const Eigen::Vector2d& X_c,
                                             const DiscreteModel& model,
                                             const Polytope& input_polytope);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct TerminalConditionsReport {
  bool displacement_covers_vehicle_step = false;  ///< condition 1
  bool successor_stays_admissible = false;        ///< condition 2
  bool input_set_has_interior = false;            ///< condition 3

  Interval delta_x;
  Interval delta_y;
  double required_step = 0.0;  ///< V_bar * dt

  int samples = 0;
  int controller_defined = 0;    ///< samples where the terminal controller exists
  int successor_violations = 0;  ///< samples with no zero-thrust successor in X
  std::optional<QuadState> violation_witness;

  double input_chebyshev_radius = 0.0;

  bool all() const {
    return displacement_covers_vehicle_step && successor_stays_admissible &&
           input_set_has_interior;
  }
  /// Conditions 1 and 3, which are exact set computations.
  bool set_conditions() const {
    return displacement_covers_vehicle_step && input_set_has_interior;
  }
};

struct TerminalConditionsOptions {
  int samples = 1000;
  std::uint64_t seed = 7;
  int N = 20;
  double H = 0.5;
  Eigen::Vector2d X_c = Eigen::Vector2d::Zero();
};

/**
 * Checks the three sufficient conditions for invariance of the terminal set.
 * Condition 1 uses support LPs over (A_T - I) X ⊕ B_T U; condition 2 samples
 * states of the terminal set and checks, by an LP per sample, that some
 * zero-thrust admissible command keeps the successor in X; condition 3 is a
 * positive Chebyshev radius of U. controller_defined counts the samples where
 * the terminal controller itself exists.
 */
TerminalConditionsReport check_terminal_conditions(const DiscreteModel& model,
                                     const Polytope& state_polytope,
                                     const Polytope& input_polytope, double V_bar,
                                     const TerminalConditionsOptions& options = {});

/// {x : ∃u ∈ U, A x + B u + G ∈ S}.
Polytope pre_set(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 const Eigen::VectorXd& G, const Polytope& target,
                 const Polytope& inputs);

/// K_0 = target, K_{i+1} = Pre(K_i) ∩ constraints, N times. Throws
/// std::runtime_error when a stage becomes empty.
Polytope backward_reachable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::VectorXd& G, const Polytope& target,
                            const Polytope& constraints, const Polytope& inputs,
                            int N);

/// Projection of p onto the listed coordinates.
Polytope project(const Polytope& p, const std::vector<Eigen::Index>& keep);

/**
 * N-step backward reachable set of one decoupled channel, kept in the lifted
 * space of (channel state, input stack u_0..u_{N-1}). The set itself is the
 * projection onto the state coordinates; membership and bounds are LPs over
 * the lifted polytope, so no explicit projection is ever formed.
 */
struct ReachableChannel {
  Subsystem subsystem;
  int horizon = 0;
  Polytope lifted;
  /// Axis-aligned bounds of the projection.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

/// x ∈ result iff some admissible input sequence keeps x_0..x_{N-1} in
/// `constraints` and puts x_N in `target`. Same set as backward_reachable.
/// Throws std::runtime_error when the set is empty.
ReachableChannel reachable_channel(const Subsystem& subsystem, const Polytope& target,
                                   const Polytope& constraints, const Polytope& inputs,
                                   int N);

struct FeasibleStartSet {
  std::array<ReachableChannel, 3> channels;  ///< longitudinal, lateral, altitude

  bool contains(const QuadState& x, double tol = 1e-9) const;
  /// Uniform draw by per-channel rejection sampling.
  std::optional<QuadState> sample(std::mt19937_64& rng, int max_tries = 100000) const;
};

/**
 * Conservative N-step feasible-start set. Works channel by channel on the
 * decoupled x-pitch, y-roll and altitude blocks; the horizontal target is
 * the square inscribed in the terminal disk so that the product of channel
 * targets lies inside the terminal set. X and U must not couple channels.
 */
FeasibleStartSet build_feasible_start_set(const DiscreteModel& model,
                                          const TerminalSet& terminal,
                                          const Polytope& state_polytope,
                                          const Polytope& input_polytope, int N);

}  // namespace quadchase

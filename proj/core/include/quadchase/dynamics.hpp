#pragma once

#include <Eigen/Core>

namespace quadchase {

inline constexpr int kStateDim = 10;
inline constexpr int kInputDim = 3;

/// Indices into the state vector X = [x ẋ θ θ̇ y ẏ φ φ̇ z ż].
namespace idx {
inline constexpr int kX = 0;
inline constexpr int kXDot = 1;
inline constexpr int kPitch = 2;
inline constexpr int kPitchRate = 3;
inline constexpr int kY = 4;
inline constexpr int kYDot = 5;
inline constexpr int kRoll = 6;
inline constexpr int kRollRate = 7;
inline constexpr int kZ = 8;
inline constexpr int kZDot = 9;

inline constexpr int kPitchCmd = 0;
inline constexpr int kRollCmd = 1;
inline constexpr int kThrust = 2;
}  // namespace idx

using QuadState = Eigen::Matrix<double, kStateDim, 1>;
using QuadInput = Eigen::Matrix<double, kInputDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;

/// Identified closed-loop attitude parameters plus mass and gravity.
struct QuadParams {
  double a_r = 30.0;
  double a_p = 30.0;
  double b_r1 = 7.0;
  double b_r0 = 35.0;
  double b_p1 = 7.0;
  double b_p0 = 35.0;
  double mass = 0.5;
  double gravity = 9.81;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Thrust that balances the weight.
  double hover_thrust() const { return mass * gravity; }
};

struct ContinuousModel {
  StateMatrix A;
  InputMatrix B;
  QuadState G;
};

struct DiscreteModel {
  StateMatrix A;
  InputMatrix B;
  QuadState G;
  double dt = 0.0;
};

ContinuousModel build_continuous(const QuadParams& params);

/// Exact zero-order-hold discretization. Rejects dt <= 0 and dt > 10 s.
DiscreteModel discretize(const ContinuousModel& model, double dt);

inline QuadState step(const DiscreteModel& model, const QuadState& x,
                      const QuadInput& u) {
  return model.A * x + model.B * u + model.G;
}

/// State at rest at (x, y, z) with zero attitude.
QuadState hover_state(double x, double y, double z);

/// Input that holds a hover: zero attitude commands, thrust = m g.
QuadInput hover_input(const QuadParams& params);

/// Rank of the controllability matrix of the (A, B) pair.
int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// One decoupled block of the discrete model: the x-pitch, y-roll or
/// altitude channel with its single input.
struct Subsystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd G;
  Eigen::VectorXi state_indices;
  int input_index = 0;
};

enum class Channel { kLongitudinal, kLateral, kAltitude };

Subsystem extract_subsystem(const DiscreteModel& model, Channel channel);

}  // namespace quadchase

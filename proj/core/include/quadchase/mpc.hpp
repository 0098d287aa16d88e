#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "quadchase/dynamics.hpp"
#include "quadchase/evader.hpp"
#include "quadchase/polytope.hpp"
#include "quadchase/prediction.hpp"
#include "quadchase/qp.hpp"
#include "quadchase/reference.hpp"
#include "quadchase/terminal_sets.hpp"

namespace quadchase {

/// What the input cost measures.
enum class InputCost {
  kTrimDeviation,  ///< ‖U_k - U_hover‖²_R
  kLiteral,        ///< ‖U_k‖²_R, which also charges for gravity compensation
};

struct MpcConfig {
  int N = 20;
  double dt = 0.05;
  StateMatrix Q = default_state_cost();
  Eigen::Matrix3d R = Eigen::Vector3d(1.0, 1.0, 0.1).asDiagonal();
  double slack_weight_quadratic = 1e3;
  double slack_weight_linear = 1e5;
  InputCost input_cost = InputCost::kTrimDeviation;
  AngleMode angle_mode = AngleMode::kFlat;
  QpOptions qp;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// Position 100, velocity 10, angle 1, angular rate 0.1.
  static StateMatrix default_state_cost();
};

/// A generic discrete affine system x+ = A x + B u + G.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd G;
};

struct CostWeights {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  /// Input the cost is measured from (hover trim or zero).
  Eigen::VectorXd input_reference;
  double slack_quadratic = 1e3;
  double slack_linear = 1e5;
};

/**
 * Inequality row blocks, in order: input constraints for steps 0..N-1, soft
 * state constraints for steps 1..N-1, hard terminal constraints on step N,
 * and slack nonnegativity for the N-1 slacks.
 */
struct RowLayout {
  int N = 0;
  Eigen::Index input_rows = 0;     ///< per step
  Eigen::Index state_rows = 0;     ///< per step
  Eigen::Index terminal_rows = 0;

  Eigen::Index state_begin() const { return N * input_rows; }
  Eigen::Index terminal_begin() const { return state_begin() + (N - 1) * state_rows; }
  Eigen::Index slack_begin() const { return terminal_begin() + terminal_rows; }
  Eigen::Index total() const { return slack_begin() + (N - 1); }
};

/**
 * Condensed problem  min ½zᵀ hessian z + linearᵀz + constant  s.t.
 * ineq_A z <= ineq_b, over z = [u_0; ...; u_{N-1}; σ_1; ...; σ_{N-1}].
 * The stacked states [x_0; ...; x_N] equal free_response + input_map * u.
 */
struct CftocProblem {
  int N = 0;
  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::MatrixXd ineq_A;
  Eigen::VectorXd ineq_b;
  RowLayout layout;
  Eigen::VectorXd free_response;
  Eigen::MatrixXd input_map;

  Eigen::Index num_inputs() const { return N * input_dim; }
  Eigen::Index num_slacks() const { return N - 1; }
  Eigen::Index num_variables() const { return num_inputs() + num_slacks(); }

  /// Stacked states for a decision vector.
  Eigen::VectorXd predict(const Eigen::VectorXd& z) const;
  double objective(const Eigen::VectorXd& z) const;
  /// max(ineq_A z - ineq_b)+.
  double violation(const Eigen::VectorXd& z) const;
};

/**
 * Eliminates the dynamics by substitution. Cost: Σ_{k=1..N} ‖x_k - r_k‖²_Q
 * + Σ_{k=0..N-1} ‖u_k - ū‖²_R + Σ (ρ_q σ_k² + ρ_l σ_k). State constraints
 * on steps 1..N-1 are relaxed to X ⊕ σ_k B_∞; inputs and the terminal set
 * on step N are hard. Throws std::invalid_argument on dimension mismatch.
 */
CftocProblem condense(const LinearSystem& system, const CostWeights& weights, int N,
                      const Eigen::VectorXd& x0, const std::vector<Eigen::VectorXd>& reference,
                      const Polytope& X, const Polytope& U, const Polytope& terminal);

/// The quadcopter instance; the terminal constraint is the 16-gon hull version
/// of the terminal set.
CftocProblem condense(const DiscreteModel& model, const MpcConfig& config,
                      const QuadParams& params, const QuadState& x0,
                      const std::vector<QuadState>& reference, const TerminalSet& terminal,
                      const Polytope& X, const Polytope& U);

struct SolveResult {
  QpStatus status = QpStatus::kInfeasible;
  std::vector<QuadInput> inputs;
  std::vector<QuadState> predicted_states;
  Eigen::VectorXd slacks;
  Eigen::VectorXd decision;
  double cost = 0.0;
  double max_slack = 0.0;
  std::vector<int> active;
  int iterations = 0;
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
};

/// Solves a quadcopter CftocProblem (state_dim 10, input_dim 3).
SolveResult solve_qp(const CftocProblem& problem, const QpOptions& options = {},
                     const std::vector<int>& hint = {});

/// Active rows of one solve mapped onto the next receding-horizon problem:
/// every per-step row moves one step earlier, rows of the first step drop.
std::vector<int> shift_active_set(const std::vector<int>& active, const RowLayout& layout);

/**
 * Candidate decision for the next problem built from the previous optimum:
 * inputs u*_1..u*_{N-1} followed by the terminal command at x*_N, with zero
 * slacks. Returns nullopt when the terminal command does not exist.
 */
std::optional<Eigen::VectorXd> shifted_candidate(const SolveResult& previous,
                                                 const DiscreteModel& model,
                                                 const Eigen::Vector2d& X_c,
                                                 const Polytope& U);

/// Settings of the chase beyond the QP itself.
struct ChaseSettings {
  VelocityBounds priors;
  double capture_height = 0.5;
  std::size_t window = 20;
  Polytope X;
  Polytope U;
};

struct StepDiagnostics {
  double t = 0.0;
  QuadInput command = QuadInput::Zero();
  QpStatus status = QpStatus::kInfeasible;
  bool fault = false;
  double cost = 0.0;
  double max_slack = 0.0;
  int iterations = 0;
  VelocityBounds bounds;
  PredictionSector sector;
  PointEstimate estimate;
  /// Whether the predicted x_N lies in the exact disk (the QP only imposes
  /// the circumscribing polygon).
  bool terminal_in_ball = false;
  SolveResult solution;
  std::vector<QuadState> reference;
};

/**
 * Receding-horizon chase controller. Each step updates the velocity bounds
 * from the vehicle history, predicts the sector, takes its Chebyshev center,
 * fits the reference, builds the terminal set at the current vehicle
 * position, condenses and solves. Warm starts from the shifted active set of
 * the previous step.
 */
class Controller {
 public:
  Controller(const QuadParams& params, const MpcConfig& config, ChaseSettings settings);

  /// One control step. On a failed solve, diagnostics.fault is set and the
  /// command is left at the solver's iterate; the caller picks the fallback.
  StepDiagnostics step(double t, const QuadState& x, const VehicleState& vehicle);

  void reset();

  const QuadParams& params() const { return params_; }
  const MpcConfig& config() const { return config_; }
  const ChaseSettings& settings() const { return settings_; }
  const DiscreteModel& model() const { return model_; }
  const EvaderHistory& history() const { return history_; }
  /// Terminal set at the given vehicle position.
  TerminalSet terminal_at(const Eigen::Vector2d& X_c) const;

 private:
  QuadParams params_;
  MpcConfig config_;
  ChaseSettings settings_;
  DiscreteModel model_;
  TerminalSet terminal_template_;
  EvaderHistory history_;
  std::vector<int> hint_;
};

}  // namespace quadchase

#pragma once

#include <vector>

#include <Eigen/Core>

namespace quadchase {

enum class QpStatus { kOptimal, kInfeasible, kMaxIter };

const char* to_string(QpStatus status);

struct QpOptions {
  int max_iter = 2000;
  /// Constraint violation accepted as satisfied.
  double feasibility_tol = 1e-9;
};

struct QpResult {
  QpStatus status = QpStatus::kInfeasible;
  Eigen::VectorXd x;
  /// One multiplier per inequality row (zero for inactive rows).
  Eigen::VectorXd multipliers;
  std::vector<int> active;
  double objective = 0.0;
  int iterations = 0;

  double primal_residual = 0.0;         ///< max(A x - b)+
  double stationarity_residual = 0.0;   ///< |H x + f + Aᵀλ|_inf
  double complementarity_residual = 0.0;  ///< max |λ_i (a_iᵀx - b_i)|
};

/**
 * Strictly convex QP  min ½xᵀHx + fᵀx  s.t.  A x <= b  (H positive definite),
 * by the Goldfarb-Idnani dual active-set method. Starts from the
 * unconstrained minimizer and adds violated constraints one at a time while
 * keeping the multipliers nonnegative.
 *
 * `hint` lists constraints that were active in a related problem (e.g. the
 * previous receding-horizon step); violated hinted rows are added first.
 * The optimum is unique, so hints change the path, never the answer.
 * Fully deterministic: identical inputs give bit-identical outputs.
 */
QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                  const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                  const QpOptions& options = {}, const std::vector<int>& hint = {});

}  // namespace quadchase

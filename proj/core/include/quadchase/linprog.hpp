#pragma once

#include <Eigen/Core>

namespace quadchase {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/**
 * Solves max cᵀx subject to Ax <= b with x free.
 *
 * Works on the dual standard form min bᵀy, Aᵀy = c, y >= 0, with a
 * two-phase tableau simplex and Bland's rule, so the tableau has one row per
 * primal variable. Intended for the small, tall problems that show up in set
 * computations (a handful of variables, hundreds of rows).
 */
LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& b);

inline LpResult lp_minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                            const Eigen::VectorXd& b) {
  LpResult r = lp_maximize(-c, A, b);
  r.objective = -r.objective;
  return r;
}

}  // namespace quadchase

#include "quadchase/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace quadchase {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr double kHarris = 1e-10;

// Tableau for min costᵀy, M y = rhs, y >= 0 with one artificial per row.
class DualTableau {
 public:
  DualTableau(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs)
      : rows_(M.rows()), vars_(M.cols()), t_(rows_ + 1, vars_ + rows_ + 1) {
    t_.setZero();
    basis_.resize(rows_);
    signs_.resize(rows_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double sign = rhs(i) < 0.0 ? -1.0 : 1.0;
      signs_(i) = sign;
      t_.row(i).head(vars_) = sign * M.row(i);
      t_(i, vars_ + i) = 1.0;
      t_(i, last()) = sign * rhs(i);
      basis_[i] = vars_ + i;
    }
  }

  // Returns false when the artificial sum cannot be driven to zero.
  bool phase_one() {
    t_.row(rows_).setZero();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      t_.row(rows_).head(vars_) -= t_.row(i).head(vars_);
      t_(rows_, last()) -= t_(i, last());
    }
    iterate(vars_ + rows_);
    double scale = 1.0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      scale = std::max(scale, std::abs(t_(i, last())));
    }
    if (-t_(rows_, last()) > 1e-9 * scale) return false;

    // Pivot zero-level artificials out where possible; rows that resist are
    // linearly dependent and stay with their artificial at zero.
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (basis_[i] < vars_) continue;
      for (Eigen::Index j = 0; j < vars_; ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
    return true;
  }

  // Returns false when the objective is unbounded below.
  bool phase_two(const Eigen::VectorXd& cost) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(vars_) = cost.transpose();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const Eigen::Index b = basis_[i];
      if (b < vars_ && cost(b) != 0.0) {
        t_.row(rows_) -= cost(b) * t_.row(i);
      }
    }
    return iterate(vars_);
  }

  const std::vector<Eigen::Index>& basis() const { return basis_; }
  Eigen::Index vars() const { return vars_; }

  // Simplex multipliers of the equality rows, read off the reduced costs of
  // the (zero-cost) artificial columns.
  Eigen::VectorXd multipliers() const {
    Eigen::VectorXd pi(rows_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      pi(i) = -signs_(i) * t_(rows_, vars_ + i);
    }
    return pi;
  }

 private:
  Eigen::Index last() const { return vars_ + rows_; }

  // Dantzig pricing over columns [0, entering_limit), falling back to
  // Bland's rule while the objective stalls (degenerate pivots), with a
  // two-pass Harris ratio test.
  bool iterate(Eigen::Index entering_limit) {
    const int max_pivots = 50 * static_cast<int>(rows_ + vars_) + 1000;
    int stalled = 0;
    for (int it = 0; it < max_pivots; ++it) {
      const bool bland = stalled > 20;
      Eigen::Index enter = -1;
      double most = -kCostTol;
      for (Eigen::Index j = 0; j < entering_limit; ++j) {
        if (t_(rows_, j) < most) {
          enter = j;
          if (bland) break;
          most = t_(rows_, j);
        }
      }
      if (enter < 0) return true;

      double limit = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a > kPivotTol) limit = std::min(limit, (std::max(t_(i, last()), 0.0) + kHarris) / a);
      }
      if (!std::isfinite(limit)) return false;
      Eigen::Index leave = -1;
      double size = 0.0;
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol || std::max(t_(i, last()), 0.0) / a > limit) continue;
        const bool better = bland ? (leave < 0 || basis_[i] < basis_[leave]) : a > size;
        if (better) {
          leave = i;
          size = a;
        }
      }
      const double before = t_(rows_, last());
      pivot(leave, enter);
      stalled = std::abs(t_(rows_, last()) - before) <= 1e-14 * (1.0 + std::abs(before))
                    ? stalled + 1
                    : 0;
    }
    throw std::runtime_error("lp: pivot limit exceeded");
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    t_(r, last()) = std::max(t_(r, last()), 0.0);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  Eigen::Index rows_;
  Eigen::Index vars_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  Eigen::VectorXd signs_;
};

// Recovers the primal point from the rows that are tight at the optimal
// dual basis.
Eigen::VectorXd recover_primal(const DualTableau& tab, const Eigen::MatrixXd& A,
                               const Eigen::VectorXd& b) {
  std::vector<Eigen::Index> tight;
  for (Eigen::Index j : tab.basis()) {
    if (j < tab.vars()) tight.push_back(j);
  }
  const Eigen::Index n = A.cols();
  if (static_cast<Eigen::Index>(tight.size()) != n) return tab.multipliers();
  Eigen::MatrixXd At(static_cast<Eigen::Index>(tight.size()), n);
  Eigen::VectorXd bt(static_cast<Eigen::Index>(tight.size()));
  for (std::size_t k = 0; k < tight.size(); ++k) {
    At.row(static_cast<Eigen::Index>(k)) = A.row(tight[k]);
    bt(static_cast<Eigen::Index>(k)) = b(tight[k]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(At);
  return lu.solve(bt);
}

bool primal_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  DualTableau tab(A.transpose(), Eigen::VectorXd::Zero(A.cols()));
  if (!tab.phase_one()) return false;
  return tab.phase_two(b);
}

}  // namespace

LpResult lp_maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& b) {
  if (A.cols() != c.size() || A.rows() != b.size()) {
    throw std::invalid_argument("lp: dimension mismatch");
  }
  LpResult result;
  const Eigen::Index n = A.cols();
  if (A.rows() == 0) {
    result.status = c.isZero() ? LpStatus::kOptimal : LpStatus::kUnbounded;
    result.x = Eigen::VectorXd::Zero(n);
    return result;
  }

  // Unit-norm rows: same feasible set, better scaled dual columns.
  const Eigen::VectorXd norms = A.rowwise().norm().cwiseMax(1e-300);
  const Eigen::MatrixXd As = norms.cwiseInverse().asDiagonal() * A;
  const Eigen::VectorXd bs = b.cwiseQuotient(norms);

  DualTableau tab(As.transpose(), c);
  if (!tab.phase_one()) {
    // No dual certificate: primal is unbounded or empty.
    result.status =
        primal_feasible(As, bs) ? LpStatus::kUnbounded : LpStatus::kInfeasible;
    return result;
  }
  if (!tab.phase_two(bs)) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  result.status = LpStatus::kOptimal;
  result.x = recover_primal(tab, As, bs);
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace quadchase

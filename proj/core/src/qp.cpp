#include "quadchase/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace quadchase {

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kInfeasible:
      return "infeasible";
    case QpStatus::kMaxIter:
      return "max-iter";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rotation of columns (i, i + 1) of J taking (a, b) to (hypot(a, b), 0) in
// the rotated coordinates.
void rotate_columns(Eigen::MatrixXd& J, Eigen::Index i, double c, double s) {
  for (Eigen::Index k = 0; k < J.rows(); ++k) {
    const double a = J(k, i);
    const double b = J(k, i + 1);
    J(k, i) = c * a + s * b;
    J(k, i + 1) = -s * a + c * b;
  }
}

// Working set of the dual method. J = L⁻ᵀ Q with Jᵀ N_active = [R; 0].
class ActiveSet {
 public:
  ActiveSet(const Eigen::MatrixXd& J0) : J_(J0), R_(Eigen::MatrixXd::Zero(J0.rows(), J0.rows())) {}

  Eigen::Index size() const { return static_cast<Eigen::Index>(rows_.size()); }
  const std::vector<int>& rows() const { return rows_; }
  const Eigen::MatrixXd& J() const { return J_; }

  // r = R⁻¹ d_head for the current active block.
  Eigen::VectorXd multiplier_direction(const Eigen::VectorXd& d) const {
    const Eigen::Index q = size();
    if (q == 0) return Eigen::VectorXd();
    return R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
  }

  void add(int row, Eigen::VectorXd d) {
    const Eigen::Index q = size();
    const Eigen::Index n = J_.cols();
    for (Eigen::Index j = n - 1; j > q; --j) {
      const double h = std::hypot(d(j - 1), d(j));
      if (h == 0.0) continue;
      const double c = d(j - 1) / h;
      const double s = d(j) / h;
      d(j - 1) = h;
      d(j) = 0.0;
      rotate_columns(J_, j - 1, c, s);
    }
    R_.col(q).head(q + 1) = d.head(q + 1);
    rows_.push_back(row);
  }

  void remove(Eigen::Index pos) {
    const Eigen::Index q = size();
    for (Eigen::Index j = pos; j + 1 < q; ++j) R_.col(j) = R_.col(j + 1);
    R_.col(q - 1).setZero();
    rows_.erase(rows_.begin() + pos);
    // Restore the triangle: R is upper Hessenberg from column pos on.
    for (Eigen::Index j = pos; j + 1 < q; ++j) {
      const double a = R_(j, j);
      const double b = R_(j + 1, j);
      const double h = std::hypot(a, b);
      if (h == 0.0) continue;
      const double c = a / h;
      const double s = b / h;
      for (Eigen::Index k = j; k + 1 < q; ++k) {
        const double r1 = R_(j, k);
        const double r2 = R_(j + 1, k);
        R_(j, k) = c * r1 + s * r2;
        R_(j + 1, k) = -s * r1 + c * r2;
      }
      rotate_columns(J_, j, c, s);
    }
  }

 private:
  Eigen::MatrixXd J_;
  Eigen::MatrixXd R_;
  std::vector<int> rows_;
};

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                  const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                  const QpOptions& options, const std::vector<int>& hint) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = A.rows();
  if (H.cols() != n || f.size() != n || (m > 0 && A.cols() != n) || b.size() != m) {
    throw std::invalid_argument("solve_qp: dimension mismatch");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("solve_qp: Hessian is not positive definite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd J0 =
      L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));

  QpResult out;
  Eigen::VectorXd x = -llt.solve(f);
  ActiveSet working(J0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);  // multipliers of the working set

  Eigen::VectorXd norms(m);
  for (Eigen::Index i = 0; i < m; ++i) norms(i) = std::max(A.row(i).norm(), 1e-300);
  std::vector<char> in_set(static_cast<std::size_t>(m), 0);
  std::vector<char> hinted(static_cast<std::size_t>(m), 0);
  for (int h : hint) {
    if (h >= 0 && h < m) hinted[static_cast<std::size_t>(h)] = 1;
  }

  auto finish = [&](QpStatus status) {
    out.status = status;
    out.x = x;
    out.multipliers = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < working.size(); ++k) {
      out.multipliers(working.rows()[static_cast<std::size_t>(k)]) = u(k);
    }
    out.active = working.rows();
    std::sort(out.active.begin(), out.active.end());
    out.objective = 0.5 * x.dot(H * x) + f.dot(x);
    const Eigen::VectorXd slack = m ? Eigen::VectorXd(A * x - b) : Eigen::VectorXd();
    out.primal_residual = m ? std::max(0.0, slack.maxCoeff()) : 0.0;
    out.stationarity_residual =
        (H * x + f + (m ? Eigen::VectorXd(A.transpose() * out.multipliers)
                        : Eigen::VectorXd::Zero(n)))
            .lpNorm<Eigen::Infinity>();
    out.complementarity_residual =
        m ? out.multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff() : 0.0;
    return out;
  };

  int iter = 0;
  while (true) {
    // Pick the constraint to add: most violated (scaled) among hinted rows,
    // otherwise among all rows; lowest index on ties.
    int p = -1;
    double worst = -options.feasibility_tol;
    for (int pass = 0; pass < 2 && p < 0; ++pass) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (in_set[si] || (pass == 0 && !hinted[si])) continue;
        const double s = (b(i) - A.row(i).dot(x)) / norms(i);
        if (s < worst) {
          worst = s;
          p = static_cast<int>(i);
        }
      }
    }
    if (p < 0) return finish(QpStatus::kOptimal);

    const Eigen::VectorXd np = -A.row(p).transpose();
    double u_p = 0.0;
    while (true) {
      if (++iter > options.max_iter) {
        out.iterations = iter;
        return finish(QpStatus::kMaxIter);
      }
      out.iterations = iter;
      const Eigen::Index q = working.size();
      const Eigen::VectorXd d = working.J().transpose() * np;
      const Eigen::VectorXd z = working.J().rightCols(n - q) * d.tail(n - q);
      const Eigen::VectorXd r = working.multiplier_direction(d);

      // Partial step: largest step keeping working-set multipliers >= 0.
      double t1 = kInf;
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r(j) > 0.0 && u(j) / r(j) < t1) {
          t1 = u(j) / r(j);
          drop = j;
        }
      }
      // Full step: makes constraint p active.
      double t2 = kInf;
      const bool independent = d.tail(n - q).norm() > 1e-10 * d.norm();
      if (independent) {
        const double s_p = b(p) - A.row(p).dot(x);
        t2 = -s_p / z.dot(np);
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return finish(QpStatus::kInfeasible);

      if (q > 0) u.head(q) -= t * r;
      u_p += t;
      if (independent) x += t * z;

      if (independent && t2 <= t1) {
        working.add(p, d);
        u(working.size() - 1) = u_p;
        in_set[static_cast<std::size_t>(p)] = 1;
        break;
      }
      // Drop the blocking constraint and retry with p.
      in_set[static_cast<std::size_t>(working.rows()[static_cast<std::size_t>(drop)])] = 0;
      for (Eigen::Index j = drop; j + 1 < q; ++j) u(j) = u(j + 1);
      u(q - 1) = 0.0;
      working.remove(drop);
    }
  }
}

}  // namespace quadchase

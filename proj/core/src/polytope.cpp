#include "quadchase/polytope.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "quadchase/linprog.hpp"

namespace quadchase {

namespace {

constexpr double kZeroRow = 1e-14;

}  // namespace

Polytope::Polytope(Eigen::MatrixXd A, Eigen::VectorXd b) {
  if (A.rows() != b.size()) {
    throw std::invalid_argument("Polytope: A and b row counts differ");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (!A.row(i).allFinite() || !std::isfinite(b(i))) {
      throw std::invalid_argument("Polytope: non-finite row");
    }
    if (A.row(i).lpNorm<Eigen::Infinity>() <= kZeroRow) {
      if (b(i) < -1e-12) throw std::invalid_argument("Polytope: empty set");
      continue;
    }
    keep.push_back(i);
  }
  A_.resize(static_cast<Eigen::Index>(keep.size()), A.cols());
  b_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    A_.row(static_cast<Eigen::Index>(k)) = A.row(keep[k]);
    b_(static_cast<Eigen::Index>(k)) = b(keep[k]);
  }
}

Polytope Polytope::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const Eigen::Index n = lower.size();
  if (upper.size() != n) throw std::invalid_argument("box: size mismatch");
  Eigen::MatrixXd A(2 * n, n);
  A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b << upper, -lower;
  return Polytope(std::move(A), std::move(b));
}

bool Polytope::contains(const Eigen::VectorXd& x, double tol) const {
  return violation(x) <= tol;
}

double Polytope::violation(const Eigen::VectorXd& x) const {
  if (rows() == 0) return 0.0;
  return std::max(0.0, (A_ * x - b_).maxCoeff());
}

Polytope Polytope::intersect(const Polytope& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("intersect: dim mismatch");
  Eigen::MatrixXd A(rows() + other.rows(), dim());
  A << A_, other.A_;
  Eigen::VectorXd b(rows() + other.rows());
  b << b_, other.b_;
  return Polytope(std::move(A), std::move(b));
}

Polytope Polytope::preimage(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) const {
  return Polytope(A_ * M, b_ - A_ * v);
}

std::optional<double> Polytope::support(const Eigen::VectorXd& direction) const {
  const LpResult r = lp_maximize(direction, A_, b_);
  if (r.status != LpStatus::kOptimal) return std::nullopt;
  return r.objective;
}

Polytope Polytope::normalized() const {
  Eigen::MatrixXd A = A_;
  Eigen::VectorXd b = b_;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double n = A.row(i).norm();
    A.row(i) /= n;
    b(i) /= n;
  }
  return Polytope(std::move(A), std::move(b));
}

ChebyshevBall chebyshev_ball(const Polytope& p) {
  const Eigen::Index n = p.dim();
  const Eigen::Index m = p.rows();
  Eigen::MatrixXd A(m + 1, n + 1);
  Eigen::VectorXd b(m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.row(i).head(n) = p.A().row(i);
    A(i, n) = p.A().row(i).norm();
    b(i) = p.b()(i);
  }
  A.row(m).setZero();
  A(m, n) = -1.0;  // r >= 0
  b(m) = 0.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c(n) = 1.0;

  ChebyshevBall ball;
  const LpResult r = lp_maximize(c, A, b);
  if (r.status == LpStatus::kUnbounded) {
    ball.empty = false;
    ball.unbounded = true;
    ball.radius = std::numeric_limits<double>::infinity();
    return ball;
  }
  if (r.status != LpStatus::kOptimal) return ball;
  ball.empty = false;
  ball.center = r.x.head(n);
  ball.radius = std::max(0.0, r.x(n));
  return ball;
}

bool is_empty(const Polytope& p) { return chebyshev_ball(p).empty; }

Polytope remove_redundant(const Polytope& p, double tol) {
  const Polytope q = p.normalized();
  const Eigen::Index m = q.rows();
  std::vector<bool> active(static_cast<std::size_t>(m), true);

  // Exact duplicates first; they defeat the per-row LP test.
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      if ((q.A().row(i) - q.A().row(j)).lpNorm<Eigen::Infinity>() < 1e-12) {
        // Keep the tighter of the two.
        if (q.b()(i) < q.b()(j)) {
          active[static_cast<std::size_t>(j)] = false;
        } else {
          active[static_cast<std::size_t>(i)] = false;
          break;
        }
      }
    }
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    if (!active[static_cast<std::size_t>(i)]) continue;
    // Maximize a_iᵀx over the other active rows with row i relaxed by 1.
    std::vector<Eigen::Index> rows;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (active[static_cast<std::size_t>(j)]) rows.push_back(j);
    }
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), q.dim());
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      A.row(static_cast<Eigen::Index>(k)) = q.A().row(rows[k]);
      b(static_cast<Eigen::Index>(k)) = q.b()(rows[k]) + (rows[k] == i ? 1.0 : 0.0);
    }
    const LpResult r = lp_maximize(q.A().row(i).transpose(), A, b);
    if (r.status == LpStatus::kInfeasible) {
      throw std::runtime_error("remove_redundant: polytope is empty");
    }
    if (r.status == LpStatus::kOptimal && r.objective <= q.b()(i) + tol) {
      active[static_cast<std::size_t>(i)] = false;
    }
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (active[static_cast<std::size_t>(i)]) keep.push_back(i);
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(keep.size()), q.dim());
  Eigen::VectorXd b(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    A.row(static_cast<Eigen::Index>(k)) = q.A().row(keep[k]);
    b(static_cast<Eigen::Index>(k)) = q.b()(keep[k]);
  }
  return Polytope(std::move(A), std::move(b));
}

Polytope eliminate(const Polytope& p, Eigen::Index var) {
  const Eigen::Index n = p.dim();
  if (var < 0 || var >= n) throw std::out_of_range("eliminate: bad coordinate");
  std::vector<Eigen::Index> pos, neg, zero;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double a = p.A()(i, var);
    if (a > kZeroRow) {
      pos.push_back(i);
    } else if (a < -kZeroRow) {
      neg.push_back(i);
    } else {
      zero.push_back(i);
    }
  }

  auto drop = [&](const Eigen::RowVectorXd& row) {
    Eigen::RowVectorXd out(n - 1);
    out << row.head(var), row.tail(n - var - 1);
    return out;
  };

  const std::size_t count = zero.size() + pos.size() * neg.size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(count), n - 1);
  Eigen::VectorXd b(static_cast<Eigen::Index>(count));
  Eigen::Index r = 0;
  for (Eigen::Index i : zero) {
    A.row(r) = drop(p.A().row(i));
    b(r++) = p.b()(i);
  }
  for (Eigen::Index i : pos) {
    for (Eigen::Index j : neg) {
      const double ai = p.A()(i, var);
      const double aj = -p.A()(j, var);
      // aj * row_i + ai * row_j cancels the eliminated coordinate.
      A.row(r) = drop(aj * p.A().row(i) + ai * p.A().row(j));
      b(r++) = aj * p.b()(i) + ai * p.b()(j);
    }
  }
  return Polytope(std::move(A), std::move(b));
}

bool contains_polytope(const Polytope& outer, const Polytope& inner, double tol) {
  for (Eigen::Index i = 0; i < outer.rows(); ++i) {
    const auto s = inner.support(outer.A().row(i).transpose());
    if (!s) {
      // Empty inner is contained in anything; unbounded inner is not.
      if (is_empty(inner)) return true;
      return false;
    }
    if (*s > outer.b()(i) + tol) return false;
  }
  return true;
}

std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> bounding_box(
    const Polytope& p) {
  const Eigen::Index n = p.dim();
  Eigen::VectorXd lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
    const auto up = p.support(e);
    const auto down = p.support(-e);
    if (!up || !down) return std::nullopt;
    hi(i) = *up;
    lo(i) = -*down;
  }
  return std::make_pair(lo, hi);
}

void write_csv(std::ostream& os, const Polytope& p) {
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.dim(); ++j) os << p.A()(i, j) << ',';
    os << p.b()(i) << '\n';
  }
}

Polytope read_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("read_csv: ragged polytope rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Polytope();
  const auto n = static_cast<Eigen::Index>(rows.front().size()) - 1;
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), n);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      A(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
    b(static_cast<Eigen::Index>(i)) = rows[i].back();
  }
  return Polytope(std::move(A), std::move(b));
}

}  // namespace quadchase

#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace quadchase {

/// The H-polytope {x : A x <= b}.
class Polytope {
 public:
  Polytope() = default;
  /// Drops all-zero rows; throws std::invalid_argument if such a row has
  /// b < 0 (empty set) or if dimensions disagree.
  Polytope(Eigen::MatrixXd A, Eigen::VectorXd b);

  static Polytope box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  Eigen::Index dim() const { return A_.cols(); }
  Eigen::Index rows() const { return A_.rows(); }

  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;

  /// Maximum constraint violation max_i (a_iᵀx - b_i), clipped at 0.
  double violation(const Eigen::VectorXd& x) const;

  Polytope intersect(const Polytope& other) const;

  /// {x : M x + v ∈ this}.
  Polytope preimage(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) const;

  /// Sup of dᵀx over the set; nullopt when unbounded or empty.
  std::optional<double> support(const Eigen::VectorXd& direction) const;

  /// Rows scaled to unit norm.
  Polytope normalized() const;

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

struct ChebyshevBall {
  Eigen::VectorXd center;
  double radius = 0.0;
  bool empty = true;
  bool unbounded = false;
};

/// Largest inscribed ball. A set with no interior reports radius 0.
ChebyshevBall chebyshev_ball(const Polytope& p);

bool is_empty(const Polytope& p);

/// Removes rows implied by the others (one LP per row).
Polytope remove_redundant(const Polytope& p, double tol = 1e-9);

/// Projects out coordinate `var` by Fourier-Motzkin elimination. The result
/// lives in dim() - 1 coordinates (the eliminated one removed).
Polytope eliminate(const Polytope& p, Eigen::Index var);

/// True when inner ⊆ outer (one support LP per row of outer).
bool contains_polytope(const Polytope& outer, const Polytope& inner,
                       double tol = 1e-9);

/// Axis-aligned bounding box, or nullopt when unbounded/empty.
std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> bounding_box(
    const Polytope& p);

/// One row per line: a_1,...,a_n,b
void write_csv(std::ostream& os, const Polytope& p);
Polytope read_csv(std::istream& is);

}  // namespace quadchase

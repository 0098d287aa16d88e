#include "quadchase/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quadchase/polytope.hpp"

namespace quadchase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegenerateSpan = 1e-9;

Eigen::Vector2d unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool in_triangle(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                 const Eigen::Vector2d& b, const Eigen::Vector2d& c, double tol) {
  const double area = cross(b - a, c - a);
  if (std::abs(area) <= tol * tol) {
    // Collapsed triangle: membership on its longest edge.
    return std::min({segment_distance(p, a, b), segment_distance(p, b, c),
                     segment_distance(p, a, c)}) <= tol;
  }
  const double s = area > 0.0 ? 1.0 : -1.0;
  auto edge_ok = [&](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
    const Eigen::Vector2d e = v - u;
    return s * cross(e, p - u) >= -tol * e.norm();
  };
  return edge_ok(a, b) && edge_ok(b, c) && edge_ok(c, a);
}

// Counterclockwise offset of `angle` from `from`, in [0, 2pi).
double ccw_offset(double angle, double from) {
  double d = std::fmod(angle - from, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d;
}

}  // namespace

Eigen::Vector2d PredictionSector::lower_end() const {
  return center + radius * unit(theta_lo);
}

Eigen::Vector2d PredictionSector::upper_end() const {
  return center + radius * unit(theta_hi);
}

std::vector<Eigen::Vector2d> propagate_extremal(const VehicleState& start,
                                                const VelocityBounds& bounds,
                                                int N, double dt, Extremal which) {
  if (N < 1) throw std::invalid_argument("propagate_extremal: N must be >= 1");
  const double slip = which == Extremal::kLower ? bounds.delta_lo : bounds.delta_hi;
  const Eigen::Vector2d u = ground_velocity(bounds.v_bar, slip, start.heading);
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  VehicleState s = start;
  out.push_back(s.position());
  for (int k = 0; k < N; ++k) {
    s = vehicle_step(s, u, dt);
    out.push_back(s.position());
  }
  return out;
}

PredictionSector build_sector(const Eigen::Vector2d& start,
                              const Eigen::Vector2d& lower_end,
                              const Eigen::Vector2d& upper_end,
                              const VelocityBounds& bounds, int N, double dt) {
  PredictionSector s;
  s.center = start;
  s.radius = std::max(0.0, bounds.v_bar * N * dt);
  if (s.radius == 0.0) return s;

  const Eigen::Vector2d lo = lower_end - start;
  const Eigen::Vector2d hi = upper_end - start;
  if (lo.norm() == 0.0 || hi.norm() == 0.0) {
    throw std::invalid_argument("build_sector: endpoint coincides with start");
  }
  s.theta_lo = std::atan2(lo.y(), lo.x());
  double span = ccw_offset(std::atan2(hi.y(), hi.x()), s.theta_lo);
  const double slip_span = bounds.delta_hi - bounds.delta_lo;
  if (span < kDegenerateSpan || span > kTwoPi - kDegenerateSpan) {
    span = slip_span > std::numbers::pi ? kTwoPi : 0.0;
  }
  s.theta_hi = s.theta_lo + span;
  return s;
}

PredictionSector predict_sector(const VehicleState& start,
                                const VelocityBounds& bounds, int N, double dt) {
  const auto upper = propagate_extremal(start, bounds, N, dt, Extremal::kUpper);
  const auto lower = propagate_extremal(start, bounds, N, dt, Extremal::kLower);
  return build_sector(start.position(), upper.back(), lower.back(), bounds, N, dt);
}

bool contains(const PredictionSector& sector, const Eigen::Vector2d& p, double tol) {
  const double scale_tol = tol * std::max(1.0, sector.radius);
  const Eigen::Vector2d rel = p - sector.center;
  const double r = rel.norm();
  if (r > sector.radius + scale_tol) return false;
  if (r <= scale_tol) return true;

  const double offset = ccw_offset(std::atan2(rel.y(), rel.x()), sector.theta_lo);
  const double angular_tol = scale_tol / r;
  if (offset <= sector.span() + angular_tol || offset >= kTwoPi - angular_tol) {
    return true;
  }
  return in_triangle(p, sector.center, sector.lower_end(), sector.upper_end(),
                     scale_tol);
}

double boundary_distance(const PredictionSector& sector, const Eigen::Vector2d& p) {
  const Eigen::Vector2d rel = p - sector.center;
  const double r = rel.norm();
  const Eigen::Vector2d a = sector.lower_end();
  const Eigen::Vector2d b = sector.upper_end();

  double arc;
  const double offset = r > 0.0 ? ccw_offset(std::atan2(rel.y(), rel.x()), sector.theta_lo)
                                 : 0.0;
  if (r > 0.0 && offset <= sector.span()) {
    arc = std::abs(sector.radius - r);
  } else {
    arc = std::min((p - a).norm(), (p - b).norm());
  }
  if (sector.span() > std::numbers::pi) {
    return std::min(arc, segment_distance(p, a, b));
  }
  return std::min({arc, segment_distance(p, sector.center, a),
                   segment_distance(p, sector.center, b)});
}

int arc_chords(const PredictionSector& sector) {
  // Sagitta of a chord subtending angle a is R (1 - cos(a / 2)).
  const double ratio = 1.0 - kArcSagitta / sector.radius;
  if (ratio <= 0.0) return kArcChords;
  const double needed = std::ceil(std::abs(sector.span()) / (2.0 * std::acos(ratio)));
  return static_cast<int>(std::max<double>(kArcChords, needed));
}

PointEstimate chebyshev_center(const PredictionSector& sector) {
  PointEstimate est;
  if (sector.radius == 0.0) {
    est.point = sector.center;
    return est;
  }
  if (sector.span() < kDegenerateSpan) {
    est.point = sector.center + 0.5 * sector.radius * unit(sector.theta_lo);
    return est;
  }

  // Counterclockwise vertex list: apex (only when the sweep is at most pi)
  // followed by the arc points.
  std::vector<Eigen::Vector2d> verts;
  const bool segment = sector.span() > std::numbers::pi;
  if (!segment) verts.push_back(sector.center);
  const int chords = arc_chords(sector);
  for (int k = 0; k <= chords; ++k) {
    const double a = sector.theta_lo + sector.span() * k / chords;
    verts.push_back(sector.center + sector.radius * unit(a));
  }

  const auto m = static_cast<Eigen::Index>(verts.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Vector2d& u = verts[static_cast<std::size_t>(i)];
    const Eigen::Vector2d& v = verts[static_cast<std::size_t>((i + 1) % m)];
    const Eigen::Vector2d normal(v.y() - u.y(), u.x() - v.x());  // outward
    A.row(i) = normal.transpose();
    b(i) = normal.dot(u);
  }
  const ChebyshevBall ball = chebyshev_ball(Polytope(A, b));
  if (ball.empty || ball.unbounded) {
    throw std::runtime_error("chebyshev_center: polygon LP failed");
  }
  est.point = ball.center;
  est.inradius = boundary_distance(sector, est.point);
  return est;
}

}  // namespace quadchase

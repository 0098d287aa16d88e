#include "quadchase/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace quadchase {

Eigen::Vector3d QuinticSegment::derivative(double t, int order) const {
  Eigen::Vector3d out;
  for (int axis = 0; axis < 3; ++axis) {
    const auto& c = coeffs[static_cast<std::size_t>(axis)];
    double v = 0.0;
    // Horner over the differentiated coefficients.
    for (int i = 5; i >= order; --i) {
      double f = 1.0;
      for (int k = 0; k < order; ++k) f *= i - k;
      v = v * t + f * c(i);
    }
    out(axis) = v;
  }
  return out;
}

QuinticSegment fit_min_jerk(const BoundaryState& start, const BoundaryState& end,
                            double T_seg) {
  if (!(T_seg > 0.0)) throw std::invalid_argument("fit_min_jerk: T_seg must be positive");
  const double T = T_seg;
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  QuinticSegment seg;
  seg.duration = T;
  for (int a = 0; a < 3; ++a) {
    const double p0 = start.position(a), v0 = start.velocity(a), a0 = start.acceleration(a);
    const double p1 = end.position(a), v1 = end.velocity(a), a1 = end.acceleration(a);
    auto& c = seg.coeffs[static_cast<std::size_t>(a)];
    c(0) = p0;
    c(1) = v0;
    c(2) = 0.5 * a0;
    c(3) = (20.0 * (p1 - p0) - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T2) / (2.0 * T3);
    c(4) = (30.0 * (p0 - p1) + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T2) /
           (2.0 * T4);
    c(5) = (12.0 * (p1 - p0) - 6.0 * (v1 + v0) * T - (a0 - a1) * T2) / (2.0 * T5);
  }
  return seg;
}

std::vector<QuadState> sample_reference(const QuinticSegment& seg, int N, double dt,
                                        const QuadParams& params, AngleMode mode) {
  if (N < 1 || !(dt > 0.0)) throw std::invalid_argument("sample_reference: need N >= 1, dt > 0");
  if (N * dt > seg.duration * (1.0 + 1e-9) + 1e-12) {
    throw std::invalid_argument("sample_reference: horizon exceeds segment");
  }
  const double g = params.gravity;
  std::vector<QuadState> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) {
    const double t = k * dt;
    const Eigen::Vector3d p = seg.position(t);
    const Eigen::Vector3d v = seg.velocity(t);
    QuadState r = QuadState::Zero();
    r(idx::kX) = p.x();
    r(idx::kY) = p.y();
    r(idx::kZ) = p.z();
    r(idx::kXDot) = v.x();
    r(idx::kYDot) = v.y();
    r(idx::kZDot) = v.z();
    if (mode == AngleMode::kFlat && k < N) {
      const Eigen::Vector3d a = seg.acceleration(t);
      const Eigen::Vector3d j = seg.jerk(t);
      r(idx::kPitch) = a.x() / g;
      r(idx::kRoll) = -a.y() / g;
      r(idx::kPitchRate) = j.x() / g;
      r(idx::kRollRate) = -j.y() / g;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<QuadState> make_reference(const QuadState& current, const PointEstimate& estimate,
                                      const Eigen::Vector2d& vehicle_velocity, double H,
                                      int N, double dt, const QuadParams& params,
                                      AngleMode mode) {
  const double g = params.gravity;
  BoundaryState start;
  start.position = {current(idx::kX), current(idx::kY), current(idx::kZ)};
  start.velocity = {current(idx::kXDot), current(idx::kYDot), current(idx::kZDot)};
  start.acceleration = {g * current(idx::kPitch), -g * current(idx::kRoll), 0.0};
  BoundaryState end;
  end.position = {estimate.point.x(), estimate.point.y(), H};
  end.velocity = {vehicle_velocity.x(), vehicle_velocity.y(), 0.0};
  return sample_reference(fit_min_jerk(start, end, N * dt), N, dt, params, mode);
}

}  // namespace quadchase

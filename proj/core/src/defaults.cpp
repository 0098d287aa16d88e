#include "quadchase/defaults.hpp"

namespace quadchase {

Polytope default_state_polytope() {
  QuadState lo, hi;
  lo << -10, -2.5, -0.5, -5, -10, -2.5, -0.5, -5, 0, -2;
  hi << 10, 2.5, 0.5, 5, 10, 2.5, 0.5, 5, 3, 2;
  return Polytope::box(lo, hi);
}

Polytope default_input_polytope(const QuadParams& params) {
  return Polytope::box(Eigen::Vector3d(-0.5, -0.5, 0.0),
                       Eigen::Vector3d(0.5, 0.5, 2.0 * params.hover_thrust()));
}

ChaseSettings default_chase_settings(const QuadParams& params) {
  ChaseSettings s;
  s.priors = VelocityBounds::from_priors(1.0, -0.3, 0.3, 0.7, 0.7, 0.7);
  s.capture_height = 0.5;
  s.window = 20;
  s.X = default_state_polytope();
  s.U = default_input_polytope(params);
  return s;
}

}  // namespace quadchase

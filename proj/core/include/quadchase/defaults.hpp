#pragma once

#include "quadchase/dynamics.hpp"
#include "quadchase/mpc.hpp"
#include "quadchase/polytope.hpp"

namespace quadchase {

/// x, y in ±10 m, z in [0, 3] m, horizontal speeds ±2.5 m/s, vertical
/// speed ±2 m/s, angles ±0.5 rad, angular rates ±5 rad/s.
Polytope default_state_polytope();

/// Attitude commands ±0.5 rad, thrust in [0, 2 m g].
Polytope default_input_polytope(const QuadParams& params);

/// V_bar = 1 m/s, slip in [-0.3, 0.3], EMA weights 0.7, H = 0.5 m, L = 20,
/// and the two default boxes.
ChaseSettings default_chase_settings(const QuadParams& params);

}  // namespace quadchase

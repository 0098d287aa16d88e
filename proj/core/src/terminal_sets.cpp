#include "quadchase/terminal_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "quadchase/linprog.hpp"

namespace quadchase {

namespace {

constexpr std::array<Eigen::Index, 3> kVelocityIdx = {idx::kXDot, idx::kYDot, idx::kZDot};
constexpr std::array<Eigen::Index, 4> kRotationIdx = {idx::kPitch, idx::kPitchRate,
                                                      idx::kRoll, idx::kRollRate};

template <std::size_t K>
Eigen::VectorXd gather(const QuadState& x, const std::array<Eigen::Index, K>& ids) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(K));
  for (std::size_t i = 0; i < K; ++i) out(static_cast<Eigen::Index>(i)) = x(ids[i]);
  return out;
}

// Rows of p placed on the given columns of a wider space.
Polytope embed(const Polytope& p, const std::vector<Eigen::Index>& cols, Eigen::Index dim) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p.rows(), dim);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    A.col(cols[j]) = p.A().col(static_cast<Eigen::Index>(j));
  }
  return Polytope(std::move(A), p.b());
}

std::vector<Eigen::Index> to_vector(const Eigen::VectorXi& v) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Rows of p that only touch `cols`, restricted to those columns. Throws if a
// row mixes `cols` with other coordinates.
Polytope restrict_rows(const Polytope& p, const std::vector<Eigen::Index>& cols,
                       const char* what) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    bool inside = false;
    bool outside = false;
    for (Eigen::Index j = 0; j < p.dim(); ++j) {
      if (p.A()(i, j) == 0.0) continue;
      if (std::find(cols.begin(), cols.end(), j) != cols.end()) {
        inside = true;
      } else {
        outside = true;
      }
    }
    if (inside && outside) {
      throw std::invalid_argument(std::string(what) + " couples decoupled channels");
    }
    if (inside) rows.push_back(i);
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = p.A()(rows[r], cols[j]);
    }
    b(static_cast<Eigen::Index>(r)) = p.b()(rows[r]);
  }
  return Polytope(std::move(A), std::move(b));
}

}  // namespace

Ball2d build_bf(const Eigen::Vector2d& X_c, double V_bar, int N, double dt) {
  if (!(V_bar > 0.0) || !(dt > 0.0) || N < 0) {
    throw std::invalid_argument("build_bf: need V_bar > 0, dt > 0, N >= 0");
  }
  return Ball2d{X_c, V_bar * N * dt};
}

Polytope circumscribing_polygon(const Ball2d& ball, int sides) {
  if (sides < 3) throw std::invalid_argument("circumscribing_polygon: sides < 3");
  Eigen::MatrixXd A(sides, 2);
  Eigen::VectorXd b(sides);
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * std::numbers::pi * i / sides;
    A(i, 0) = std::cos(a);
    A(i, 1) = std::sin(a);
    b(i) = A.row(i).dot(ball.center) + ball.radius;
  }
  return Polytope(std::move(A), std::move(b));
}

bool TerminalSet::contains(const QuadState& x, double tol) const {
  return ball.contains({x(idx::kX), x(idx::kY)}, tol) && x(idx::kZ) >= -tol &&
         x(idx::kZ) <= capture_height + tol &&
         velocity_box.contains(gather(x, kVelocityIdx), tol) &&
         rotational_box.contains(gather(x, kRotationIdx), tol) &&
         state_polytope.contains(x, tol);
}

bool TerminalSet::contains_hull(const QuadState& x, double tol) const {
  return hull_polytope().contains(x, tol);
}

Polytope TerminalSet::hull_polytope() const {
  Polytope p = embed(polyhedral_hull, {idx::kX, idx::kY}, kStateDim);
  Eigen::MatrixXd Az = Eigen::MatrixXd::Zero(2, kStateDim);
  Az(0, idx::kZ) = 1.0;
  Az(1, idx::kZ) = -1.0;
  p = p.intersect(Polytope(Az, Eigen::Vector2d(capture_height, 0.0)));
  p = p.intersect(embed(velocity_box, {kVelocityIdx.begin(), kVelocityIdx.end()}, kStateDim));
  p = p.intersect(embed(rotational_box, {kRotationIdx.begin(), kRotationIdx.end()}, kStateDim));
  return p.intersect(state_polytope);
}

Polytope project(const Polytope& p, const std::vector<Eigen::Index>& keep) {
  Polytope q = p;
  std::vector<Eigen::Index> remaining;
  for (Eigen::Index j = 0; j < p.dim(); ++j) remaining.push_back(j);
  for (Eigen::Index j = p.dim() - 1; j >= 0; --j) {
    if (std::find(keep.begin(), keep.end(), j) != keep.end()) continue;
    q = remove_redundant(eliminate(q, j));
    remaining.erase(remaining.begin() + j);
  }
  // Columns are now the kept coordinates in ascending order; permute to the
  // requested order.
  Eigen::MatrixXd A(q.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto it = std::find(remaining.begin(), remaining.end(), keep[k]);
    A.col(static_cast<Eigen::Index>(k)) = q.A().col(it - remaining.begin());
  }
  return Polytope(std::move(A), q.b());
}

TerminalSet build_terminal_set(const Eigen::Vector2d& X_c, const VelocityBounds& bounds,
                               const Polytope& state_polytope, int N, double dt,
                               double H) {
  if (!(H > 0.0)) throw std::invalid_argument("build_terminal_set: H must be positive");
  if (state_polytope.dim() != kStateDim) {
    throw std::invalid_argument("build_terminal_set: state polytope must be 10-D");
  }
  TerminalSet t;
  t.ball = build_bf(X_c, bounds.V_bar, N, dt);
  t.capture_height = H;
  t.velocity_box = project(state_polytope, {kVelocityIdx.begin(), kVelocityIdx.end()});
  t.rotational_box = project(state_polytope, {kRotationIdx.begin(), kRotationIdx.end()});
  t.polyhedral_hull = circumscribing_polygon(t.ball);
  t.state_polytope = state_polytope;
  if (is_empty(t.hull_polytope())) {
    throw std::runtime_error("build_terminal_set: terminal set misses the state set");
  }
  return t;
}

const char* to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::kOk:
      return "ok";
    case TerminalStatus::kDegenerate:
      return "degenerate";
    case TerminalStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

Eigen::Matrix2d horizontal_input_gain(const DiscreteModel& model) {
  Eigen::Matrix2d g;
  g << model.B(idx::kX, idx::kPitchCmd), model.B(idx::kX, idx::kRollCmd),
      model.B(idx::kY, idx::kPitchCmd), model.B(idx::kY, idx::kRollCmd);
  return g;
}

TerminalControllerResult terminal_controller(const QuadState& x,
                                             const Eigen::Vector2d& X_c,
                                             const DiscreteModel& model,
                                             const Polytope& input_polytope) {
  const Eigen::Matrix2d gain = horizontal_input_gain(model);
  if (std::abs(gain.determinant()) < 1e-300) {
    throw std::runtime_error("terminal_controller: horizontal input gain is singular");
  }
  TerminalControllerResult out;
  const Eigen::Vector2d offset = X_c - Eigen::Vector2d(x(idx::kX), x(idx::kY));
  const double dist = offset.norm();
  if (dist < 1e-12) {
    out.status = TerminalStatus::kDegenerate;
    return out;
  }
  out.direction = offset / dist;

  const QuadState drift = (model.A - StateMatrix::Identity()) * x;
  const Eigen::Vector2d free(drift(idx::kX), drift(idx::kY));

  // Variables (u_pitch, u_roll, t): free + gain u = t * direction, t >= 0,
  // [u; 0] ∈ U. Maximize t.
  const Eigen::Index m = input_polytope.rows();
  Eigen::MatrixXd A(m + 5, 3);
  Eigen::VectorXd b(m + 5);
  A.setZero();
  A.topLeftCorner(m, 2) = input_polytope.A().leftCols(2);
  b.head(m) = input_polytope.b();
  for (int r = 0; r < 2; ++r) {
    A.row(m + r) << gain(r, 0), gain(r, 1), -out.direction(r);
    b(m + r) = -free(r);
    A.row(m + 2 + r) = -A.row(m + r);
    b(m + 2 + r) = free(r);
  }
  A(m + 4, 2) = -1.0;
  b(m + 4) = 0.0;

  const LpResult lp = lp_maximize(Eigen::Vector3d(0.0, 0.0, 1.0), A, b);
  if (lp.status != LpStatus::kOptimal || lp.x(2) <= 1e-12) {
    out.status = TerminalStatus::kInfeasible;
    return out;
  }
  out.input = QuadInput(lp.x(0), lp.x(1), 0.0);
  out.displacement = lp.x(2);
  out.status = TerminalStatus::kOk;
  return out;
}

TerminalConditionsReport check_terminal_conditions(const DiscreteModel& model,
                                     const Polytope& state_polytope,
                                     const Polytope& input_polytope, double V_bar,
                                     const TerminalConditionsOptions& options) {
  TerminalConditionsReport report;
  report.required_step = V_bar * model.dt;

  // Condition 1: e_iᵀ((A_T - I) X ⊕ B_T U) ⊇ [-V̄ΔT, V̄ΔT] for i = x, y.
  const StateMatrix drift = model.A - StateMatrix::Identity();
  auto interval = [&](int row) {
    const Eigen::VectorXd ds = drift.row(row).transpose();
    const Eigen::VectorXd du = model.B.row(row).transpose();
    const auto xs_hi = state_polytope.support(ds);
    const auto xs_lo = state_polytope.support(-ds);
    const auto us_hi = input_polytope.support(du);
    const auto us_lo = input_polytope.support(-du);
    if (!xs_hi || !xs_lo || !us_hi || !us_lo) {
      throw std::runtime_error("check_terminal_conditions: X or U is empty or unbounded");
    }
    return Interval{-*xs_lo - *us_lo, *xs_hi + *us_hi};
  };
  report.delta_x = interval(idx::kX);
  report.delta_y = interval(idx::kY);
  const double need = report.required_step;
  report.displacement_covers_vehicle_step =
      report.delta_x.lo <= -need && report.delta_x.hi >= need &&
      report.delta_y.lo <= -need && report.delta_y.hi >= need;

  // Condition 3.
  const ChebyshevBall ub = chebyshev_ball(input_polytope);
  report.input_chebyshev_radius = ub.empty ? 0.0 : ub.radius;
  report.input_set_has_interior = !ub.empty && ub.radius > 1e-12;

  // Condition 2, sampled over the terminal set.
  VelocityBounds vb;
  vb.V_bar = V_bar;
  const TerminalSet terminal = build_terminal_set(options.X_c, vb, state_polytope,
                                                  options.N, model.dt, options.H);
  const auto box = bounding_box(terminal.hull_polytope());
  if (!box) throw std::runtime_error("check_terminal_conditions: unbounded terminal set");
  std::mt19937_64 rng(options.seed);
  std::vector<std::uniform_real_distribution<double>> dists;
  for (Eigen::Index i = 0; i < kStateDim; ++i) {
    dists.emplace_back(box->first(i), box->second(i));
  }
  Eigen::MatrixXd thrust_rows = Eigen::MatrixXd::Zero(2, kInputDim);
  thrust_rows(0, idx::kThrust) = 1.0;
  thrust_rows(1, idx::kThrust) = -1.0;
  const Polytope zero_thrust = input_polytope.intersect(Polytope(thrust_rows, Eigen::VectorXd::Zero(2)));
  const int max_tries = 1000 * options.samples;
  for (int tries = 0; report.samples < options.samples && tries < max_tries; ++tries) {
    QuadState x;
    for (Eigen::Index i = 0; i < kStateDim; ++i) x(i) = dists[static_cast<std::size_t>(i)](rng);
    if (!terminal.contains(x)) continue;
    ++report.samples;
    const TerminalControllerResult tc =
        terminal_controller(x, options.X_c, model, input_polytope);
    if (tc.status != TerminalStatus::kInfeasible) ++report.controller_defined;
    // Some zero-thrust admissible command keeps the successor in X.
    const Polytope next_in_X =
        state_polytope.preimage(model.B, model.A * x + model.G).intersect(zero_thrust);
    if (is_empty(next_in_X)) {
      ++report.successor_violations;
      if (!report.violation_witness) report.violation_witness = x;
    }
  }
  report.successor_stays_admissible =
      report.samples == options.samples && report.successor_violations == 0;
  return report;
}

Polytope pre_set(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 const Eigen::VectorXd& G, const Polytope& target,
                 const Polytope& inputs) {
  const Eigen::Index n = A.cols();
  const Eigen::Index m = B.cols();
  const Eigen::Index tr = target.rows();
  const Eigen::Index ur = inputs.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(tr + ur, n + m);
  Eigen::VectorXd l(tr + ur);
  L.topLeftCorner(tr, n) = target.A() * A;
  L.topRightCorner(tr, m) = target.A() * B;
  l.head(tr) = target.b() - target.A() * G;
  L.bottomRightCorner(ur, m) = inputs.A();
  l.tail(ur) = inputs.b();
  Polytope lifted(std::move(L), std::move(l));
  for (Eigen::Index j = n + m - 1; j >= n; --j) {
    lifted = remove_redundant(eliminate(lifted, j));
  }
  return lifted;
}

Polytope backward_reachable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::VectorXd& G, const Polytope& target,
                            const Polytope& constraints, const Polytope& inputs,
                            int N) {
  if (N < 1) throw std::invalid_argument("backward_reachable: N must be >= 1");
  Polytope k = target;
  for (int i = 0; i < N; ++i) {
    const Polytope next = pre_set(A, B, G, k, inputs).intersect(constraints);
    if (is_empty(next)) {
      throw std::runtime_error("backward_reachable: target unreachable at stage " +
                               std::to_string(i + 1));
    }
    k = remove_redundant(next);
  }
  return k;
}

ReachableChannel reachable_channel(const Subsystem& subsystem, const Polytope& target,
                                   const Polytope& constraints, const Polytope& inputs,
                                   int N) {
  if (N < 1) throw std::invalid_argument("reachable_channel: N must be >= 1");
  const Eigen::Index n = subsystem.A.cols();
  const Eigen::Index m = subsystem.B.cols();
  const Eigen::Index dim = n + N * m;
  const Eigen::Index rows = N * (constraints.rows() + inputs.rows()) + target.rows();

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(rows, dim);
  Eigen::VectorXd l(rows);
  // x_k = Phi_k [x; u] + c_k
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, dim);
  phi.leftCols(n).setIdentity();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  Eigen::Index r = 0;
  for (int k = 0; k <= N; ++k) {
    const Polytope& p = k < N ? constraints : target;
    L.middleRows(r, p.rows()) = p.A() * phi;
    l.segment(r, p.rows()) = p.b() - p.A() * c;
    r += p.rows();
    if (k == N) break;
    L.block(r, n + k * m, inputs.rows(), m) = inputs.A();
    l.segment(r, inputs.rows()) = inputs.b();
    r += inputs.rows();
    phi = subsystem.A * phi;
    phi.middleCols(n + k * m, m) += subsystem.B;
    c = subsystem.A * c + subsystem.G;
  }

  ReachableChannel out;
  out.subsystem = subsystem;
  out.horizon = N;
  out.lifted = Polytope(std::move(L), std::move(l));
  if (is_empty(out.lifted)) {
    throw std::runtime_error("reachable_channel: target unreachable in " +
                             std::to_string(N) + " steps");
  }
  out.lower.resize(n);
  out.upper.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    d(i) = 1.0;
    const auto hi = out.lifted.support(d);
    const auto lo = out.lifted.support(-d);
    if (!hi || !lo) throw std::runtime_error("reachable_channel: unbounded set");
    out.upper(i) = *hi;
    out.lower(i) = -*lo;
  }
  return out;
}

bool ReachableChannel::contains(const Eigen::VectorXd& x, double tol) const {
  const Eigen::Index n = x.size();
  if ((x - lower).minCoeff() < -tol || (upper - x).minCoeff() < -tol) return false;
  // Feasibility LP over the input stack with the state fixed.
  const Eigen::MatrixXd Au = lifted.A().rightCols(lifted.dim() - n);
  const Eigen::VectorXd bu =
      lifted.b() - lifted.A().leftCols(n) * x + Eigen::VectorXd::Constant(lifted.rows(), tol);
  return lp_maximize(Eigen::VectorXd::Zero(Au.cols()), Au, bu).status == LpStatus::kOptimal;
}

bool FeasibleStartSet::contains(const QuadState& x, double tol) const {
  for (const ReachableChannel& c : channels) {
    const Eigen::VectorXi& ids = c.subsystem.state_indices;
    Eigen::VectorXd v(ids.size());
    for (Eigen::Index i = 0; i < ids.size(); ++i) v(i) = x(ids(i));
    if (!c.contains(v, tol)) return false;
  }
  return true;
}

std::optional<QuadState> FeasibleStartSet::sample(std::mt19937_64& rng, int max_tries) const {
  QuadState x = QuadState::Zero();
  for (const ReachableChannel& c : channels) {
    const Eigen::Index n = c.lower.size();
    bool found = false;
    for (int t = 0; t < max_tries && !found; ++t) {
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = std::uniform_real_distribution<double>(c.lower(i), c.upper(i))(rng);
      }
      if (c.contains(v, 0.0)) {
        for (Eigen::Index i = 0; i < n; ++i) x(c.subsystem.state_indices(i)) = v(i);
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }
  return x;
}

FeasibleStartSet build_feasible_start_set(const DiscreteModel& model,
                                          const TerminalSet& terminal,
                                          const Polytope& state_polytope,
                                          const Polytope& input_polytope, int N) {
  const std::array<Channel, 3> order = {Channel::kLongitudinal, Channel::kLateral,
                                        Channel::kAltitude};
  FeasibleStartSet out;
  const double half_side = terminal.ball.radius / std::sqrt(2.0);
  for (std::size_t c = 0; c < order.size(); ++c) {
    const Subsystem sub = extract_subsystem(model, order[c]);
    const std::vector<Eigen::Index> cols = to_vector(sub.state_indices);
    const Polytope constraints = restrict_rows(state_polytope, cols, "state set");
    const Polytope inputs = restrict_rows(input_polytope, {sub.input_index}, "input set");

    // Channel target: the state constraints plus the position window.
    Eigen::VectorXd lo(1), hi(1);
    switch (order[c]) {
      case Channel::kLongitudinal:
        lo(0) = terminal.ball.center.x() - half_side;
        hi(0) = terminal.ball.center.x() + half_side;
        break;
      case Channel::kLateral:
        lo(0) = terminal.ball.center.y() - half_side;
        hi(0) = terminal.ball.center.y() + half_side;
        break;
      case Channel::kAltitude:
        lo(0) = 0.0;
        hi(0) = terminal.capture_height;
        break;
    }
    const Polytope window = embed(Polytope::box(lo, hi), {0}, sub.A.cols());
    const Polytope target = constraints.intersect(window);
    if (is_empty(target)) {
      throw std::runtime_error("build_feasible_start_set: empty channel target");
    }
    out.channels[c] = reachable_channel(sub, target, constraints, inputs, N);
  }
  return out;
}

}  // namespace quadchase

#include "quadchase/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

namespace quadchase {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

Polytope terminal_constraint(const TerminalSet& terminal) {
  const Polytope& hull = terminal.polyhedral_hull;
  const Eigen::Index h = hull.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(h + 2, kStateDim);
  Eigen::VectorXd b(h + 2);
  A.block(0, idx::kX, h, 1) = hull.A().col(0);
  A.block(0, idx::kY, h, 1) = hull.A().col(1);
  b.head(h) = hull.b();
  A(h, idx::kZ) = 1.0;
  b(h) = terminal.capture_height;
  A(h + 1, idx::kZ) = -1.0;
  b(h + 1) = 0.0;
  return Polytope(std::move(A), std::move(b)).intersect(terminal.state_polytope);
}

}  // namespace

StateMatrix MpcConfig::default_state_cost() {
  Eigen::Matrix<double, kStateDim, 1> d;
  d << 100, 10, 1, 0.1, 100, 10, 1, 0.1, 100, 10;
  return d.asDiagonal();
}

void MpcConfig::validate() const {
  if (N < 1) throw std::invalid_argument("MpcConfig: N must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("MpcConfig: dt must be positive");
  if (!Q.allFinite() || !R.allFinite()) {
    throw std::invalid_argument("MpcConfig: Q and R must be finite");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      (R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("MpcConfig: Q and R must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<StateMatrix>(Q).eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("MpcConfig: Q must be positive semidefinite");
  }
  if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(R).eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("MpcConfig: R must be positive definite");
  }
  if (!(slack_weight_quadratic > 0.0) || !(slack_weight_linear > 0.0)) {
    throw std::invalid_argument("MpcConfig: slack weights must be positive");
  }
  if (qp.max_iter < 1) throw std::invalid_argument("MpcConfig: qp.max_iter must be >= 1");
}

Eigen::VectorXd CftocProblem::predict(const Eigen::VectorXd& z) const {
  return free_response + input_map * z.head(num_inputs());
}

double CftocProblem::objective(const Eigen::VectorXd& z) const {
  return 0.5 * z.dot(hessian * z) + linear.dot(z) + constant;
}

double CftocProblem::violation(const Eigen::VectorXd& z) const {
  if (ineq_A.rows() == 0) return 0.0;
  return std::max(0.0, (ineq_A * z - ineq_b).maxCoeff());
}

CftocProblem condense(const LinearSystem& system, const CostWeights& weights, int N,
                      const Eigen::VectorXd& x0, const std::vector<Eigen::VectorXd>& reference,
                      const Polytope& X, const Polytope& U, const Polytope& terminal) {
  const Eigen::Index n = system.A.rows();
  const Eigen::Index m = system.B.cols();
  if (N < 1) throw std::invalid_argument("condense: N must be >= 1");
  if (system.A.cols() != n || system.B.rows() != n || system.G.size() != n) {
    throw std::invalid_argument("condense: inconsistent system dimensions");
  }
  if (weights.Q.rows() != n || weights.Q.cols() != n || weights.R.rows() != m ||
      weights.R.cols() != m || weights.input_reference.size() != m) {
    throw std::invalid_argument("condense: weight dimensions do not match the system");
  }
  if (x0.size() != n || !x0.allFinite()) {
    throw std::invalid_argument("condense: x0 must be finite with the state dimension");
  }
  if (reference.size() != static_cast<std::size_t>(N) + 1) {
    throw std::invalid_argument("condense: reference must have N + 1 entries");
  }
  for (const auto& r : reference) {
    if (r.size() != n || !r.allFinite()) {
      throw std::invalid_argument("condense: reference entries must be finite states");
    }
  }
  if (X.dim() != n || terminal.dim() != n || U.dim() != m) {
    throw std::invalid_argument("condense: constraint dimensions do not match the system");
  }
  if (!(weights.slack_quadratic > 0.0) || !(weights.slack_linear > 0.0)) {
    throw std::invalid_argument("condense: slack weights must be positive");
  }

  CftocProblem p;
  p.N = N;
  p.state_dim = n;
  p.input_dim = m;
  const Eigen::Index nu = N * m;
  const Eigen::Index ns = N - 1;
  const Eigen::Index nz = nu + ns;

  // Prediction matrices: x_k = F_k + Σ_{j<k} A^{k-1-j} B u_j.
  p.free_response.resize((N + 1) * n);
  p.input_map = Eigen::MatrixXd::Zero((N + 1) * n, nu);
  p.free_response.head(n) = x0;
  for (int k = 1; k <= N; ++k) {
    p.free_response.segment(k * n, n) =
        system.A * p.free_response.segment((k - 1) * n, n) + system.G;
    p.input_map.block(k * n, 0, n, nu) = system.A * p.input_map.block((k - 1) * n, 0, n, nu);
    p.input_map.block(k * n, (k - 1) * m, n, m) = system.B;
  }

  // Cost.
  const Eigen::MatrixXd Gam = p.input_map.bottomRows(N * n);
  Eigen::VectorXd err(N * n);
  for (int k = 1; k <= N; ++k) {
    err.segment((k - 1) * n, n) = p.free_response.segment(k * n, n) - reference[k];
  }
  Eigen::MatrixXd QG(N * n, nu);
  Eigen::VectorXd Qerr(N * n);
  for (int k = 0; k < N; ++k) {
    QG.middleRows(k * n, n) = weights.Q * Gam.middleRows(k * n, n);
    Qerr.segment(k * n, n) = weights.Q * err.segment(k * n, n);
  }
  p.hessian = Eigen::MatrixXd::Zero(nz, nz);
  p.linear = Eigen::VectorXd::Zero(nz);
  Eigen::MatrixXd Huu = Gam.transpose() * QG;
  const Eigen::VectorXd Rref = weights.R * weights.input_reference;
  for (int k = 0; k < N; ++k) {
    Huu.block(k * m, k * m, m, m) += weights.R;
    p.linear.segment(k * m, m) = -2.0 * Rref;
  }
  p.hessian.topLeftCorner(nu, nu) = Huu + Huu.transpose();
  p.linear.head(nu) += 2.0 * Gam.transpose() * Qerr;
  p.constant = err.dot(Qerr) + N * weights.input_reference.dot(Rref);
  for (Eigen::Index s = 0; s < ns; ++s) {
    p.hessian(nu + s, nu + s) = 2.0 * weights.slack_quadratic;
    p.linear(nu + s) = weights.slack_linear;
  }

  // Constraints.
  p.layout.N = N;
  p.layout.input_rows = U.rows();
  p.layout.state_rows = X.rows();
  p.layout.terminal_rows = terminal.rows();
  const Eigen::Index rows = p.layout.total();
  p.ineq_A = Eigen::MatrixXd::Zero(rows, nz);
  p.ineq_b.resize(rows);
  for (int k = 0; k < N; ++k) {
    const Eigen::Index r = k * U.rows();
    p.ineq_A.block(r, k * m, U.rows(), m) = U.A();
    p.ineq_b.segment(r, U.rows()) = U.b();
  }
  const Eigen::VectorXd l1 = X.A().cwiseAbs().rowwise().sum();
  for (int k = 1; k < N; ++k) {
    const Eigen::Index r = p.layout.state_begin() + (k - 1) * X.rows();
    p.ineq_A.block(r, 0, X.rows(), nu) = X.A() * p.input_map.middleRows(k * n, n);
    p.ineq_A.block(r, nu + (k - 1), X.rows(), 1) = -l1;
    p.ineq_b.segment(r, X.rows()) = X.b() - X.A() * p.free_response.segment(k * n, n);
  }
  {
    const Eigen::Index r = p.layout.terminal_begin();
    p.ineq_A.block(r, 0, terminal.rows(), nu) = terminal.A() * p.input_map.bottomRows(n);
    p.ineq_b.segment(r, terminal.rows()) = terminal.b() - terminal.A() * p.free_response.tail(n);
  }
  for (Eigen::Index s = 0; s < ns; ++s) {
    p.ineq_A(p.layout.slack_begin() + s, nu + s) = -1.0;
    p.ineq_b(p.layout.slack_begin() + s) = 0.0;
  }
  if (!all_finite(p.hessian) || !all_finite(p.ineq_A) || !p.ineq_b.allFinite()) {
    throw std::invalid_argument("condense: non-finite problem data");
  }
  return p;
}

CftocProblem condense(const DiscreteModel& model, const MpcConfig& config,
                      const QuadParams& params, const QuadState& x0,
                      const std::vector<QuadState>& reference, const TerminalSet& terminal,
                      const Polytope& X, const Polytope& U) {
  LinearSystem sys{model.A, model.B, model.G};
  CostWeights w;
  w.Q = config.Q;
  w.R = config.R;
  w.input_reference = config.input_cost == InputCost::kTrimDeviation
                          ? Eigen::VectorXd(hover_input(params))
                          : Eigen::VectorXd::Zero(kInputDim);
  w.slack_quadratic = config.slack_weight_quadratic;
  w.slack_linear = config.slack_weight_linear;
  std::vector<Eigen::VectorXd> ref(reference.begin(), reference.end());
  return condense(sys, w, config.N, x0, ref, X, U, terminal_constraint(terminal));
}

SolveResult solve_qp(const CftocProblem& problem, const QpOptions& options,
                     const std::vector<int>& hint) {
  if (problem.state_dim != kStateDim || problem.input_dim != kInputDim) {
    throw std::invalid_argument("solve_qp: not a quadcopter problem");
  }
  const QpResult qp =
      solve_qp(problem.hessian, problem.linear, problem.ineq_A, problem.ineq_b, options, hint);
  SolveResult out;
  out.status = qp.status;
  out.decision = qp.x;
  out.active = qp.active;
  out.iterations = qp.iterations;
  out.primal_residual = qp.primal_residual;
  out.stationarity_residual = qp.stationarity_residual;
  out.complementarity_residual = qp.complementarity_residual;
  out.cost = qp.objective + problem.constant;
  out.slacks = qp.x.tail(problem.num_slacks());
  out.max_slack = out.slacks.size() ? std::max(0.0, out.slacks.maxCoeff()) : 0.0;
  for (int k = 0; k < problem.N; ++k) {
    out.inputs.push_back(qp.x.segment<kInputDim>(k * kInputDim));
  }
  const Eigen::VectorXd states = problem.predict(qp.x);
  for (int k = 0; k <= problem.N; ++k) {
    out.predicted_states.push_back(states.segment<kStateDim>(k * kStateDim));
  }
  return out;
}

std::vector<int> shift_active_set(const std::vector<int>& active, const RowLayout& layout) {
  std::vector<int> out;
  const auto ur = layout.input_rows;
  const auto xr = layout.state_rows;
  for (int row : active) {
    const Eigen::Index r = row;
    if (r < layout.state_begin()) {
      if (r >= ur) out.push_back(static_cast<int>(r - ur));
    } else if (r < layout.terminal_begin()) {
      if (r - layout.state_begin() >= xr) out.push_back(static_cast<int>(r - xr));
    } else if (r < layout.slack_begin()) {
      out.push_back(row);
    } else if (r > layout.slack_begin()) {
      out.push_back(row - 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Eigen::VectorXd> shifted_candidate(const SolveResult& previous,
                                                 const DiscreteModel& model,
                                                 const Eigen::Vector2d& X_c,
                                                 const Polytope& U) {
  const auto N = static_cast<int>(previous.inputs.size());
  if (N < 1 || previous.predicted_states.size() != previous.inputs.size() + 1) {
    throw std::invalid_argument("shifted_candidate: malformed previous solution");
  }
  const TerminalControllerResult tc =
      terminal_controller(previous.predicted_states.back(), X_c, model, U);
  if (tc.status == TerminalStatus::kInfeasible) return std::nullopt;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(N * kInputDim + (N - 1));
  for (int k = 1; k < N; ++k) z.segment<kInputDim>((k - 1) * kInputDim) = previous.inputs[k];
  z.segment<kInputDim>((N - 1) * kInputDim) = tc.input;
  return z;
}

Controller::Controller(const QuadParams& params, const MpcConfig& config,
                       ChaseSettings settings)
    : params_(params),
      config_(config),
      settings_(std::move(settings)),
      history_(settings_.window) {
  params_.validate();
  config_.validate();
  settings_.priors.validate();
  if (settings_.X.dim() != kStateDim || settings_.U.dim() != kInputDim) {
    throw std::invalid_argument("Controller: X must be 10-D and U 3-D");
  }
  model_ = discretize(build_continuous(params_), config_.dt);
  terminal_template_ = build_terminal_set(Eigen::Vector2d::Zero(), settings_.priors,
                                          settings_.X, config_.N, config_.dt,
                                          settings_.capture_height);
}

void Controller::reset() {
  history_.clear();
  hint_.clear();
}

TerminalSet Controller::terminal_at(const Eigen::Vector2d& X_c) const {
  TerminalSet t = terminal_template_;
  t.ball.center = X_c;
  t.polyhedral_hull = circumscribing_polygon(t.ball);
  return t;
}

StepDiagnostics Controller::step(double t, const QuadState& x, const VehicleState& vehicle) {
  StepDiagnostics d;
  d.t = t;
  history_.push(t, vehicle);
  d.bounds = update_bounds(settings_.priors, history_);
  d.sector = predict_sector(vehicle, d.bounds, config_.N, config_.dt);
  d.estimate = chebyshev_center(d.sector);
  d.reference = make_reference(x, d.estimate, vehicle.velocity(), settings_.capture_height,
                               config_.N, config_.dt, params_, config_.angle_mode);
  const TerminalSet terminal = terminal_at(vehicle.position());
  const CftocProblem problem =
      condense(model_, config_, params_, x, d.reference, terminal, settings_.X, settings_.U);
  d.solution = solve_qp(problem, config_.qp, hint_);
  d.status = d.solution.status;
  d.fault = d.status != QpStatus::kOptimal;
  d.command = d.solution.inputs.front();
  d.cost = d.solution.cost;
  d.max_slack = d.solution.max_slack;
  d.iterations = d.solution.iterations;
  const QuadState& xN = d.solution.predicted_states.back();
  d.terminal_in_ball = terminal.ball.contains({xN(idx::kX), xN(idx::kY)}, 1e-9);
  hint_ = d.fault ? std::vector<int>{} : shift_active_set(d.solution.active, problem.layout);
  return d;
}

}  // namespace quadchase

#include "quadchase/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace quadchase {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("QuadParams: " + what);
}

}  // namespace

void QuadParams::validate() const {
  const double all[] = {a_r, a_p, b_r1, b_r0, b_p1, b_p0, mass, gravity};
  for (double v : all) require(std::isfinite(v), "non-finite parameter");
  require(mass > 0.0, "mass must be positive");
  require(gravity > 0.0, "gravity must be positive");
  require(b_r1 > 0.0 && b_p1 > 0.0, "damping coefficients must be positive");
  require(b_r0 > 0.0 && b_p0 > 0.0, "stiffness coefficients must be positive");
  require(a_r != 0.0 && a_p != 0.0, "attitude gains must be nonzero");
}

ContinuousModel build_continuous(const QuadParams& params) {
  params.validate();
  ContinuousModel m;
  m.A.setZero();
  m.B.setZero();
  m.G.setZero();

  m.A(idx::kX, idx::kXDot) = 1.0;
  m.A(idx::kXDot, idx::kPitch) = params.gravity;
  m.A(idx::kPitch, idx::kPitchRate) = 1.0;
  m.A(idx::kPitchRate, idx::kPitch) = -params.b_p0;
  m.A(idx::kPitchRate, idx::kPitchRate) = -params.b_p1;

  m.A(idx::kY, idx::kYDot) = 1.0;
  m.A(idx::kYDot, idx::kRoll) = -params.gravity;
  m.A(idx::kRoll, idx::kRollRate) = 1.0;
  m.A(idx::kRollRate, idx::kRoll) = -params.b_r0;
  m.A(idx::kRollRate, idx::kRollRate) = -params.b_r1;

  m.A(idx::kZ, idx::kZDot) = 1.0;

  // Signs as identified: the commanded angle enters with -a.
  m.B(idx::kPitchRate, idx::kPitchCmd) = -params.a_p;
  m.B(idx::kRollRate, idx::kRollCmd) = -params.a_r;
  m.B(idx::kZDot, idx::kThrust) = 1.0 / params.mass;

  m.G(idx::kZDot) = -params.gravity;
  return m;
}

DiscreteModel discretize(const ContinuousModel& model, double dt) {
  if (!(dt > 0.0) || dt > 10.0) {
    throw std::invalid_argument("discretize: dt must lie in (0, 10] s");
  }
  // exp([[A, B, G], [0, 0, 0]] dt) = [[A_T, B_T, G_T], [0, I, 0], [0, 0, 1]]
  constexpr int n = kStateDim + kInputDim + 1;
  Eigen::Matrix<double, n, n> aug = Eigen::Matrix<double, n, n>::Zero();
  aug.topLeftCorner<kStateDim, kStateDim>() = model.A;
  aug.block<kStateDim, kInputDim>(0, kStateDim) = model.B;
  aug.block<kStateDim, 1>(0, kStateDim + kInputDim) = model.G;

  const Eigen::Matrix<double, n, n> phi = (aug * dt).exp();

  DiscreteModel d;
  d.A = phi.topLeftCorner<kStateDim, kStateDim>();
  d.B = phi.block<kStateDim, kInputDim>(0, kStateDim);
  d.G = phi.block<kStateDim, 1>(0, kStateDim + kInputDim);
  d.dt = dt;
  return d;
}

QuadState hover_state(double x, double y, double z) {
  QuadState s = QuadState::Zero();
  s(idx::kX) = x;
  s(idx::kY) = y;
  s(idx::kZ) = z;
  return s;
}

QuadInput hover_input(const QuadParams& params) {
  return QuadInput(0.0, 0.0, params.hover_thrust());
}

int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd ctrb(n, n * B.cols());
  Eigen::MatrixXd block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * B.cols(), B.cols()) = block;
    block = A * block;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb);
  lu.setThreshold(1e-12);
  return static_cast<int>(lu.rank());
}

Subsystem extract_subsystem(const DiscreteModel& model, Channel channel) {
  Subsystem s;
  switch (channel) {
    case Channel::kLongitudinal:
      s.state_indices = Eigen::Vector4i(idx::kX, idx::kXDot, idx::kPitch,
                                        idx::kPitchRate);
      s.input_index = idx::kPitchCmd;
      break;
    case Channel::kLateral:
      s.state_indices =
          Eigen::Vector4i(idx::kY, idx::kYDot, idx::kRoll, idx::kRollRate);
      s.input_index = idx::kRollCmd;
      break;
    case Channel::kAltitude:
      s.state_indices = Eigen::Vector2i(idx::kZ, idx::kZDot);
      s.input_index = idx::kThrust;
      break;
  }
  const Eigen::Index n = s.state_indices.size();
  s.A.resize(n, n);
  s.B.resize(n, 1);
  s.G.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s.A(i, j) = model.A(s.state_indices(i), s.state_indices(j));
    }
    s.B(i, 0) = model.B(s.state_indices(i), s.input_index);
    s.G(i) = model.G(s.state_indices(i));
  }
  return s;
}

}  // namespace quadchase

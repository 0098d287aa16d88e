#include "quadchase_tools/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace quadchase::tools {

using nlohmann::json;

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& log_csv_columns() {
  static const std::vector<std::string> columns = {
      "t",          "x",          "x_dot",      "theta",     "theta_dot",  "y",
      "y_dot",      "phi",        "phi_dot",    "z",         "z_dot",      "x_v",
      "y_v",        "v_x",        "v_y",        "heading",   "cmd_theta",  "cmd_phi",
      "cmd_thrust", "app_theta",  "app_phi",    "app_thrust", "status",    "fault",
      "cost",       "max_slack",  "iterations", "terminal_in_ball", "v_bar", "delta_lo",
      "delta_hi",   "estimate_x", "estimate_y", "inradius",  "sector_cx",  "sector_cy",
      "sector_radius", "sector_theta_lo", "sector_theta_hi", "error"};
  return columns;
}

void write_log_csv(std::ostream& os, const SimLog& log) {
  const auto& cols = log_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const SimRecord& r : log.records) {
    std::vector<std::string> f;
    f.reserve(cols.size());
    auto num = [&](double v) { f.push_back(format_number(v)); };
    num(r.t);
    for (int i = 0; i < kStateDim; ++i) num(r.quad(i));
    num(r.vehicle.x);
    num(r.vehicle.y);
    num(r.vehicle.vx);
    num(r.vehicle.vy);
    num(r.vehicle.heading);
    for (int i = 0; i < kInputDim; ++i) num(r.command(i));
    for (int i = 0; i < kInputDim; ++i) num(r.applied(i));
    f.emplace_back(to_string(r.status));
    f.emplace_back(r.fault ? "1" : "0");
    num(r.cost);
    num(r.max_slack);
    f.push_back(std::to_string(r.iterations));
    f.emplace_back(r.terminal_in_ball ? "1" : "0");
    num(r.bounds.v_bar);
    num(r.bounds.delta_lo);
    num(r.bounds.delta_hi);
    num(r.estimate.point.x());
    num(r.estimate.point.y());
    num(r.estimate.inradius);
    num(r.sector.center.x());
    num(r.sector.center.y());
    num(r.sector.radius);
    num(r.sector.theta_lo);
    num(r.sector.theta_hi);
    num(r.error);
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
    os << '\n';
  }
}

void write_telemetry_csv(std::ostream& os, const SimLog& log) {
  os << "t,x_v,y_v,v_x,v_y,heading\n";
  for (const SimRecord& r : log.records) {
    os << format_number(r.t) << ',' << format_number(r.vehicle.x) << ','
       << format_number(r.vehicle.y) << ',' << format_number(r.vehicle.vx) << ','
       << format_number(r.vehicle.vy) << ',' << format_number(r.vehicle.heading) << '\n';
  }
}

void write_prediction_csv(std::ostream& os, const SimLog& log) {
  os << "t,sector_cx,sector_cy,sector_radius,sector_theta_lo,sector_theta_hi,estimate_x,"
        "estimate_y,inradius\n";
  for (const SimRecord& r : log.records) {
    os << format_number(r.t) << ',' << format_number(r.sector.center.x()) << ','
       << format_number(r.sector.center.y()) << ',' << format_number(r.sector.radius) << ','
       << format_number(r.sector.theta_lo) << ',' << format_number(r.sector.theta_hi) << ','
       << format_number(r.estimate.point.x()) << ',' << format_number(r.estimate.point.y())
       << ',' << format_number(r.estimate.inradius) << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_number(m(i, j));
    os << '\n';
  }
}

json state_json(const QuadState& x) {
  return {{"x", x(idx::kX)},         {"x_dot", x(idx::kXDot)},
          {"theta", x(idx::kPitch)}, {"theta_dot", x(idx::kPitchRate)},
          {"y", x(idx::kY)},         {"y_dot", x(idx::kYDot)},
          {"phi", x(idx::kRoll)},    {"phi_dot", x(idx::kRollRate)},
          {"z", x(idx::kZ)},         {"z_dot", x(idx::kZDot)}};
}

json vehicle_json(const VehicleState& v) {
  return {{"x", v.x}, {"y", v.y}, {"vx", v.vx}, {"vy", v.vy}, {"heading", v.heading}};
}

json sector_json(const PredictionSector& s) {
  return {{"center", {s.center.x(), s.center.y()}},
          {"radius", s.radius},
          {"theta_lo", s.theta_lo},
          {"theta_hi", s.theta_hi}};
}

json estimate_json(const PointEstimate& e) {
  return {{"x", e.point.x()}, {"y", e.point.y()}, {"inradius", e.inradius}};
}

json record_json(const SimRecord& r) {
  return {{"t", r.t},
          {"cost", r.cost},
          {"status", to_string(r.status)},
          {"max_slack", r.max_slack},
          {"estimate", estimate_json(r.estimate)},
          {"sector", sector_json(r.sector)},
          {"command", {r.command(0), r.command(1), r.command(2)}},
          {"applied", {r.applied(0), r.applied(1), r.applied(2)}},
          {"fault", r.fault},
          {"iterations", r.iterations},
          {"terminal_in_ball", r.terminal_in_ball},
          {"quad", state_json(r.quad)},
          {"vehicle", vehicle_json(r.vehicle)},
          {"error", r.error}};
}

json conditions_json(const TerminalConditionsReport& r) {
  json j = {{"all", r.all()},
            {"displacement_covers_vehicle_step", r.displacement_covers_vehicle_step},
            {"successor_stays_admissible", r.successor_stays_admissible},
            {"input_set_has_interior", r.input_set_has_interior},
            {"delta_x", {r.delta_x.lo, r.delta_x.hi}},
            {"delta_y", {r.delta_y.lo, r.delta_y.hi}},
            {"required_step", r.required_step},
            {"samples", r.samples},
            {"controller_defined", r.controller_defined},
            {"successor_violations", r.successor_violations},
            {"input_chebyshev_radius", r.input_chebyshev_radius}};
  if (r.violation_witness) j["violation_witness"] = state_json(*r.violation_witness);
  return j;
}

json log_json(const SimLog& log) {
  json records = json::array();
  for (const SimRecord& r : log.records) records.push_back(record_json(r));
  return {{"name", log.name},
          {"seed", log.seed},
          {"dt", log.dt},
          {"horizon", log.horizon},
          {"V_bar", log.V_bar},
          {"faults", log.faults},
          {"reversals", log.reversals},
          {"conditions", log.conditions ? conditions_json(*log.conditions) : json(nullptr)},
          {"records", records}};
}

json metrics_json(const TrackingMetrics& m, double threshold) {
  return {{"steady_state_error", m.steady_state},
          {"peak_error", m.peak},
          {"outside_reversal_peak", m.outside_reversal_peak},
          {"convergence_threshold", threshold},
          {"convergence_time", m.convergence_time ? json(*m.convergence_time) : json(nullptr)},
          {"faults", m.faults},
          {"max_slack", m.max_slack},
          {"samples", m.errors.size()}};
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace quadchase::tools

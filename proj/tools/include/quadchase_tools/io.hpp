#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "quadchase/simulator.hpp"

namespace quadchase::tools {

/// Header of the flat per-step log written by write_log_csv.
const std::vector<std::string>& log_csv_columns();

/// One row per tick; numbers use the shortest round-trip representation,
/// so identical runs give byte-identical files.
void write_log_csv(std::ostream& os, const SimLog& log);

/// Vehicle telemetry: t, x_v, y_v, v_x, v_y, heading.
void write_telemetry_csv(std::ostream& os, const SimLog& log);

/// Per-step sector and point estimate: t, sector geometry, estimate, inradius.
void write_prediction_csv(std::ostream& os, const SimLog& log);

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

/// Diagnostics record of one tick: t, cost, status, max_slack, estimate,
/// sector, command, plus the quad and vehicle states and the error.
nlohmann::json record_json(const SimRecord& record);

nlohmann::json log_json(const SimLog& log);
nlohmann::json metrics_json(const TrackingMetrics& metrics, double threshold);
nlohmann::json conditions_json(const TerminalConditionsReport& report);
nlohmann::json sector_json(const PredictionSector& sector);
nlohmann::json estimate_json(const PointEstimate& estimate);
nlohmann::json state_json(const QuadState& x);
nlohmann::json vehicle_json(const VehicleState& v);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

/// Writes text to a file, creating parent directories. Throws
/// std::runtime_error on failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace quadchase::tools

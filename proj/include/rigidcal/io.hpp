#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidcal/board.hpp"
#include "rigidcal/frame.hpp"
#include "rigidcal/sim.hpp"

namespace rigidcal::io {

using nlohmann::json;
namespace fs = std::filesystem;

enum class Units { Meters, Millimeters };

Units parse_units(const std::string& s);  // "m" | "mm", else ParseError
const char* to_string(Units u);
double to_meters(Units u);  // scale factor

// {"radius_m": 0.05, "dot_angles_deg": [0, 90, 180, 270], "above_height_m": 0.05}
BoardModel board_from_json(const json& j);
json board_to_json(const BoardModel& board);
BoardModel load_board(const fs::path& path);

// CSV with header x,y,z,kind (kind is dot or above, exactly one above row).
MeasurementSet parse_measurement_csv(const std::string& text, const ToolId& tool, Units units);
// {"units": "mm", "dots": [[x, y, z], ...], "above": [x, y, z]}; "units" overrides the fallback.
MeasurementSet parse_measurement_json(const json& j, const ToolId& tool, Units fallback);
// Dispatches on extension (.json, otherwise CSV).
MeasurementSet load_measurement(const fs::path& path, const ToolId& tool, Units units);
void write_measurement_csv(const fs::path& path, const MeasurementSet& m, Units units);

json transform_to_json(const RigidTransform& t);  // {"rotation_wxyz": [...], "translation_m": [...]}
RigidTransform transform_from_json(const json& j, double translation_scale = 1.0,
                                   const char* translation_key = "translation_m");

struct SessionEntry {
  ToolId tool;
  std::optional<fs::path> file;
  std::optional<RigidTransform> marker_pose;  // camera tools may give a marker pose instead
};

struct SessionFile {
  BoardModel board;
  bool board_given = false;
  std::vector<SessionEntry> measurements;
  RansacParams ransac;
  Units units = Units::Meters;
  double warn_threshold_m = 2.0 * kMillimeter;
};

SessionFile parse_session(const json& j, const fs::path& base_dir);
SessionFile load_session(const fs::path& path);
std::vector<MeasurementSet> load_session_measurements(const SessionFile& session);

// Calibration file: every pairwise transform with quaternion order (w, x, y, z)
// and translations in meters, per-tool frames, residuals and cross-checks.
// `notes` are extra warnings to record alongside the cross-check ones.
json calibration_to_json(const CalibrationResult& r, double warn_threshold_m,
                         const std::vector<std::string>& notes = {});
// Restores tools and tool_to_common; enough for tool_to_tool.
CalibrationResult calibration_from_json(const json& j);
CalibrationResult load_calibration(const fs::path& path);

struct SimulateConfig {
  sim::CampaignConfig campaign;
  fs::path output_dir = "sim_out";
  std::optional<double> intrinsic_mm;  // defaults to the mean kinematic error magnitude
};

SimulateConfig parse_simulate_config(const json& j, const fs::path& base_dir);
SimulateConfig load_simulate_config(const fs::path& path);

json read_json_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace rigidcal::io

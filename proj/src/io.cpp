#include "rigidcal/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "rigidcal/error.hpp"

namespace rigidcal::io {

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw CalibrationError(ErrorCode::ParseError, msg); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) parse_fail(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) parse_fail(where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(where + ": missing '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(where + " must be finite");
  return v;
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, where + "." + key);
}

std::uint64_t seed_or(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_unsigned()) parse_fail(where + "." + key + " must be a non-negative integer");
  return it->get<std::uint64_t>();
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback, const std::string& where) {
  return static_cast<std::size_t>(seed_or(j, key, fallback, where));
}

Point3 vec3(const json& j, double scale, const std::string& where) {
  if (!j.is_array() || j.size() != 3) parse_fail(where + " must be an array of 3 numbers");
  return Point3(number(j[0], where), number(j[1], where), number(j[2], where)) * scale;
}

json vec3_json(const Point3& p, double scale = 1.0) { return json::array({p.x() / scale, p.y() / scale, p.z() / scale}); }

PointList point_list(const json& j, double scale, const std::string& where) {
  if (!j.is_array()) parse_fail(where + " must be an array of points");
  PointList out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec3(j[i], scale, where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s.empty()) parse_fail(where + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) parse_fail(where + ": bad number '" + s + "'");
  return v;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

sim::NoiseModel noise_from_json(const json& j, const sim::NoiseModel& fallback, const std::string& where) {
  check_keys(j, {"sigma0_mm", "k"}, where);
  sim::NoiseModel n = fallback;
  n.sigma0 = number_or(j, "sigma0_mm", fallback.sigma0 / kMillimeter, where) * kMillimeter;
  n.k = number_or(j, "k", fallback.k, where);
  if (n.sigma0 < 0.0 || n.k < 0.0) parse_fail(where + ": noise parameters must be >= 0");
  return n;
}

RansacParams ransac_from_json(const json& j, RansacParams p, const std::string& where) {
  check_keys(j, {"inlier_threshold_mm", "max_iterations", "min_inliers", "seed"}, where);
  p.inlier_threshold = number_or(j, "inlier_threshold_mm", p.inlier_threshold / kMillimeter, where) * kMillimeter;
  p.max_iterations = static_cast<int>(count_or(j, "max_iterations", static_cast<std::size_t>(p.max_iterations), where));
  p.min_inliers = static_cast<int>(count_or(j, "min_inliers", static_cast<std::size_t>(p.min_inliers), where));
  p.seed = seed_or(j, "seed", p.seed, where);
  try {
    p.validate();
  } catch (const CalibrationError& e) {
    parse_fail(where + ": " + e.detail());
  }
  return p;
}

}  // namespace

Units parse_units(const std::string& s) {
  if (s == "m") return Units::Meters;
  if (s == "mm") return Units::Millimeters;
  parse_fail("units must be \"m\" or \"mm\", got \"" + s + "\"");
}

const char* to_string(Units u) { return u == Units::Meters ? "m" : "mm"; }

double to_meters(Units u) { return u == Units::Meters ? 1.0 : kMillimeter; }

BoardModel board_from_json(const json& j) {
  check_keys(j, {"radius_m", "dot_angles_deg", "above_height_m"}, "board");
  const double radius = number(require(j, "radius_m", "board"), "board.radius_m");
  const double above = number(require(j, "above_height_m", "board"), "board.above_height_m");
  const json& angles = require(j, "dot_angles_deg", "board");
  if (!angles.is_array()) parse_fail("board.dot_angles_deg must be an array");
  std::vector<double> deg;
  for (const auto& a : angles) deg.push_back(number(a, "board.dot_angles_deg"));
  try {
    return BoardModel::from_degrees(radius, deg, above);
  } catch (const CalibrationError& e) {
    parse_fail(std::string("invalid board: ") + e.detail());
  }
}

json board_to_json(const BoardModel& board) {
  json angles = json::array();
  for (double a : board.dot_angles()) angles.push_back(a * 180.0 / std::numbers::pi);
  return {{"radius_m", board.radius()}, {"dot_angles_deg", angles}, {"above_height_m", board.above_height()}};
}

BoardModel load_board(const fs::path& path) { return board_from_json(read_json_file(path)); }

MeasurementSet parse_measurement_csv(const std::string& text, const ToolId& tool, Units units) {
  const double scale = to_meters(units);
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  bool above_seen = false;
  std::size_t line_no = 0;
  MeasurementSet m;
  m.tool = tool;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_csv(t);
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      if (cells != std::vector<std::string>{"x", "y", "z", "kind"}) parse_fail(where + ": expected header x,y,z,kind");
      header_seen = true;
      continue;
    }
    if (cells.size() != 4) parse_fail(where + ": expected 4 columns");
    const Point3 p(parse_double(cells[0], where), parse_double(cells[1], where), parse_double(cells[2], where));
    if (cells[3] == "dot") {
      if (above_seen) parse_fail(where + ": dot rows must precede the above row");
      m.dot_points.push_back(p * scale);
    } else if (cells[3] == "above") {
      if (above_seen) parse_fail(where + ": more than one above row");
      m.above_point = p * scale;
      above_seen = true;
    } else {
      parse_fail(where + ": kind must be dot or above, got '" + cells[3] + "'");
    }
  }
  if (!header_seen) parse_fail("missing header x,y,z,kind");
  if (!above_seen) parse_fail("missing above row");
  return m;
}

MeasurementSet parse_measurement_json(const json& j, const ToolId& tool, Units fallback) {
  check_keys(j, {"units", "dots", "above", "tool"}, "measurement");
  Units units = fallback;
  if (auto it = j.find("units"); it != j.end()) {
    if (!it->is_string()) parse_fail("measurement.units must be a string");
    units = parse_units(it->get<std::string>());
  }
  MeasurementSet m;
  m.tool = tool;
  m.dot_points = point_list(require(j, "dots", "measurement"), to_meters(units), "measurement.dots");
  m.above_point = vec3(require(j, "above", "measurement"), to_meters(units), "measurement.above");
  return m;
}

MeasurementSet load_measurement(const fs::path& path, const ToolId& tool, Units units) {
  try {
    if (path.extension() == ".json") return parse_measurement_json(read_json_file(path), tool, units);
    return parse_measurement_csv(read_text_file(path), tool, units);
  } catch (const CalibrationError& e) {
    if (e.code() != ErrorCode::ParseError) throw;
    parse_fail(path.string() + " (tool " + tool.name + "): " + e.detail());
  }
}

void write_measurement_csv(const fs::path& path, const MeasurementSet& m, Units units) {
  const double scale = to_meters(units);
  std::ostringstream out;
  out << std::setprecision(17) << "x,y,z,kind\n";
  auto row = [&](const Point3& p, const char* kind) {
    out << p.x() / scale << ',' << p.y() / scale << ',' << p.z() / scale << ',' << kind << '\n';
  };
  for (const auto& p : m.dot_points) row(p, "dot");
  row(m.above_point, "above");
  write_text_file(path, out.str());
}

json transform_to_json(const RigidTransform& t) {
  const auto& q = t.rotation();
  return {{"rotation_wxyz", {q.w(), q.x(), q.y(), q.z()}}, {"translation_m", vec3_json(t.translation())}};
}

RigidTransform transform_from_json(const json& j, double translation_scale, const char* translation_key) {
  if (!j.is_object()) parse_fail("transform must be an object");
  const json& q = require(j, "rotation_wxyz", "transform");
  if (!q.is_array() || q.size() != 4) parse_fail("rotation_wxyz must have 4 numbers");
  const Point3 t = vec3(require(j, translation_key, "transform"), translation_scale, std::string("transform.") + translation_key);
  try {
    return {UnitQuaternion(number(q[0], "w"), number(q[1], "x"), number(q[2], "y"), number(q[3], "z")), t};
  } catch (const CalibrationError& e) {
    parse_fail(std::string("invalid transform: ") + e.detail());
  }
}

SessionFile parse_session(const json& j, const fs::path& base_dir) {
  check_keys(j, {"board", "units", "ransac", "measurements", "cross_check_warn_mm"}, "session");
  SessionFile s;
  s.units = parse_units(require(j, "units", "session").get<std::string>());
  if (auto it = j.find("board"); it != j.end()) {
    s.board = it->is_string() ? load_board(base_dir / it->get<std::string>()) : board_from_json(*it);
    s.board_given = true;
  }
  if (auto it = j.find("ransac"); it != j.end()) s.ransac = ransac_from_json(*it, s.ransac, "session.ransac");
  s.warn_threshold_m = number_or(j, "cross_check_warn_mm", s.warn_threshold_m / kMillimeter, "session") * kMillimeter;

  const json& ms = require(j, "measurements", "session");
  if (!ms.is_array()) parse_fail("session.measurements must be an array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::string where = "session.measurements[" + std::to_string(i) + "]";
    check_keys(ms[i], {"tool", "file", "marker_pose"}, where);
    const json& name = require(ms[i], "tool", where);
    if (!name.is_string() || name.get<std::string>().empty()) parse_fail(where + ".tool must be a nonempty string");
    SessionEntry e;
    e.tool = ToolId{name.get<std::string>()};
    if (!names.insert(e.tool.name).second) parse_fail("duplicate tool id " + e.tool.name);
    const bool has_file = ms[i].contains("file");
    const bool has_pose = ms[i].contains("marker_pose");
    if (has_file == has_pose) parse_fail(where + ": give exactly one of file or marker_pose");
    if (has_file) {
      e.file = base_dir / ms[i]["file"].get<std::string>();
      if (!fs::exists(*e.file)) parse_fail("measurement file for tool " + e.tool.name + " not found: " + e.file->string());
    } else {
      e.marker_pose = transform_from_json(ms[i]["marker_pose"], to_meters(s.units), "translation");
    }
    s.measurements.push_back(std::move(e));
  }
  if (s.measurements.size() < 2) parse_fail("session needs at least 2 measurements");
  return s;
}

SessionFile load_session(const fs::path& path) {
  try {
    return parse_session(read_json_file(path), path.parent_path());
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

std::vector<MeasurementSet> load_session_measurements(const SessionFile& session) {
  std::vector<MeasurementSet> out;
  for (const auto& e : session.measurements) {
    MeasurementSet m;
    if (e.file) {
      m = load_measurement(*e.file, e.tool, session.units);
    } else {
      PointList pts = board_points_camera_frame(MarkerPose{*e.marker_pose}, session.board);
      m.tool = e.tool;
      m.above_point = pts.back();
      pts.pop_back();
      m.dot_points = std::move(pts);
    }
    m.validate();
    if (session.board_given && m.dot_points.size() != session.board.dot_count()) {
      throw CalibrationError(ErrorCode::OrderMismatch,
                             "tool " + e.tool.name + " has " + std::to_string(m.dot_points.size()) +
                                 " dots, board has " + std::to_string(session.board.dot_count()));
    }
    out.push_back(std::move(m));
  }
  return out;
}

json calibration_to_json(const CalibrationResult& r, double warn_threshold_m,
                         const std::vector<std::string>& notes) {
  json j;
  j["format"] = "rigidcal.calibration";
  j["version"] = 1;
  j["conventions"] = {{"quaternion_order", "wxyz"},
                      {"translation_units", "m"},
                      {"transform", "maps points from 'from' tool coordinates to 'to' tool coordinates"}};
  json tools = json::array();
  for (const auto& t : r.tools) tools.push_back(t.name);
  j["tools"] = tools;

  json warnings = notes;
  json frames = json::object();
  for (const auto& id : r.tools) {
    const CommonFrame& f = r.frame(id);
    frames[id.name] = {
        {"tool_to_common", transform_to_json(f.tool_to_common)},
        {"origin_m", vec3_json(f.origin)},
        {"plane", {{"normal", vec3_json(f.plane_fit.plane.normal)}, {"offset_m", f.plane_fit.plane.offset}}},
        {"inliers", f.plane_fit.inliers},
        {"plane_rms_m", f.plane_fit.rms_residual},
        {"residual_rms_m", r.residuals.at(id)},
    };
  }
  j["frames"] = frames;

  json transforms = json::array();
  for (const auto& a : r.tools) {
    for (const auto& b : r.tools) {
      if (a == b) continue;
      json t = transform_to_json(tool_to_tool(r, a, b));
      t["from"] = a.name;
      t["to"] = b.name;
      transforms.push_back(t);
    }
  }
  j["transforms"] = transforms;

  json checks = json::array();
  for (const auto& [pair, c] : r.cross_check) {
    const bool warn = c.translation_m > warn_threshold_m;
    checks.push_back({{"a", pair.first.name},
                      {"b", pair.second.name},
                      {"translation_m", c.translation_m},
                      {"raw_translation_m", c.raw_translation_m},
                      {"rotation_rad", c.rotation_rad},
                      {"warning", warn}});
    if (warn) {
      std::ostringstream msg;
      msg << "cross-check " << pair.first.name << "/" << pair.second.name << ": frame-based and "
          << "correspondence-based transforms differ by " << std::setprecision(4)
          << c.translation_m / kMillimeter << " mm (touch order mismatch?)";
      warnings.push_back(msg.str());
    }
  }
  j["cross_check"] = checks;
  j["warn_threshold_m"] = warn_threshold_m;
  j["warnings"] = warnings;
  j["warning"] = !warnings.empty();
  return j;
}

CalibrationResult calibration_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "rigidcal.calibration") parse_fail("not a calibration file");
  CalibrationResult r;
  const json& tools = require(j, "tools", "calibration");
  const json& frames = require(j, "frames", "calibration");
  if (!tools.is_array()) parse_fail("calibration.tools must be an array");
  for (const auto& t : tools) {
    if (!t.is_string()) parse_fail("tool names must be strings");
    const ToolId id{t.get<std::string>()};
    const json& f = require(frames, id.name.c_str(), "calibration.frames");
    CommonFrame frame;
    frame.tool = id;
    frame.tool_to_common = transform_from_json(require(f, "tool_to_common", "frame"));
    if (f.contains("origin_m")) frame.origin = vec3(f["origin_m"], 1.0, "origin_m");
    r.tools.push_back(id);
    r.frames.emplace(id, std::move(frame));
  }
  return r;
}

CalibrationResult load_calibration(const fs::path& path) {
  try {
    return calibration_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  } catch (const CalibrationError& e) {
    if (e.code() != ErrorCode::ParseError) throw;
    parse_fail(path.string() + ": " + e.detail());
  }
}

SimulateConfig parse_simulate_config(const json& j, const fs::path& base_dir) {
  check_keys(j, {"seed", "output_dir", "n_tools", "board", "ransac", "calibration_noise", "grasp", "trajectory",
                 "consistency"},
             "config");
  SimulateConfig cfg;
  sim::CampaignConfig& c = cfg.campaign;
  c.seed = seed_or(j, "seed", c.seed, "config");
  c.n_tools = count_or(j, "n_tools", c.n_tools, "config");
  if (auto it = j.find("output_dir"); it != j.end()) cfg.output_dir = base_dir / it->get<std::string>();
  else cfg.output_dir = base_dir / cfg.output_dir;
  if (auto it = j.find("board"); it != j.end()) {
    c.board = it->is_string() ? load_board(base_dir / it->get<std::string>()) : board_from_json(*it);
  }
  if (auto it = j.find("ransac"); it != j.end()) c.ransac = ransac_from_json(*it, c.ransac, "config.ransac");
  if (auto it = j.find("calibration_noise"); it != j.end()) {
    c.calibration_noise = noise_from_json(*it, c.calibration_noise, "config.calibration_noise");
  }

  if (auto it = j.find("grasp"); it != j.end()) {
    const json& g = *it;
    check_keys(g, {"repetitions", "ring_diameter_mm", "ring_positions_mm", "kinematic_noise", "camera_noise", "intrinsic_mm"},
               "config.grasp");
    c.grasp_repetitions = count_or(g, "repetitions", c.grasp_repetitions, "config.grasp");
    c.ring_diameter = number_or(g, "ring_diameter_mm", c.ring_diameter / kMillimeter, "config.grasp") * kMillimeter;
    if (g.contains("ring_positions_mm")) c.ring_centers = point_list(g["ring_positions_mm"], kMillimeter, "config.grasp.ring_positions_mm");
    if (g.contains("kinematic_noise")) {
      c.grasp_noise.kinematic = noise_from_json(g["kinematic_noise"], c.grasp_noise.kinematic, "config.grasp.kinematic_noise");
    }
    if (g.contains("camera_noise")) {
      c.grasp_noise.camera = noise_from_json(g["camera_noise"], c.grasp_noise.camera, "config.grasp.camera_noise");
    }
    if (g.contains("intrinsic_mm")) cfg.intrinsic_mm = number(g["intrinsic_mm"], "config.grasp.intrinsic_mm");
  }

  if (auto it = j.find("trajectory"); it != j.end()) {
    const json& t = *it;
    check_keys(t, {"repetitions", "radii_mm", "waypoints", "start_mm", "noise"}, "config.trajectory");
    c.trajectory_repetitions = count_or(t, "repetitions", c.trajectory_repetitions, "config.trajectory");
    if (t.contains("radii_mm")) {
      if (!t["radii_mm"].is_array()) parse_fail("config.trajectory.radii_mm must be an array");
      c.radii.clear();
      for (const auto& r : t["radii_mm"]) c.radii.push_back(number(r, "config.trajectory.radii_mm") * kMillimeter);
    }
    c.trajectory.waypoints = count_or(t, "waypoints", c.trajectory.waypoints, "config.trajectory");
    if (t.contains("start_mm")) c.trajectory.start = vec3(t["start_mm"], kMillimeter, "config.trajectory.start_mm");
    if (t.contains("noise")) c.trajectory_noise = noise_from_json(t["noise"], c.trajectory_noise, "config.trajectory.noise");
  }

  if (auto it = j.find("consistency"); it != j.end()) {
    const json& k = *it;
    check_keys(k, {"poses_mm", "noise"}, "config.consistency");
    if (k.contains("poses_mm")) c.consistency_poses = point_list(k["poses_mm"], kMillimeter, "config.consistency.poses_mm");
    if (k.contains("noise")) c.consistency_noise = noise_from_json(k["noise"], c.consistency_noise, "config.consistency.noise");
  }

  try {
    c.validate();
  } catch (const CalibrationError& e) {
    parse_fail(std::string("invalid config: ") + e.detail());
  }
  return cfg;
}

SimulateConfig load_simulate_config(const fs::path& path) {
  try {
    return parse_simulate_config(read_json_file(path), path.parent_path());
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw CalibrationError(ErrorCode::ParseError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CalibrationError(ErrorCode::ParseError, "cannot write " + path.string());
  out << text;
}

}  // namespace rigidcal::io

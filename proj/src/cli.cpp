#include "rigidcal/cli.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "rigidcal/frame.hpp"
#include "rigidcal/metrics.hpp"
#include "rigidcal/sim.hpp"

namespace rigidcal::cli {

namespace {

using io::json;

int report_error(const CalibrationError& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return exit_code_for(e.code());
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string grasp_csv(const std::vector<sim::GraspTrial>& trials) {
  std::ostringstream s;
  s << "tool,x_mm,y_mm,z_mm,error_mm\n";
  auto row = [&](const char* tool, const Point3& p, double err) {
    s << tool << ',' << fixed(p.x() / kMillimeter) << ',' << fixed(p.y() / kMillimeter) << ','
      << fixed(p.z() / kMillimeter) << ',' << fixed(err / kMillimeter) << '\n';
  };
  for (const auto& t : trials) {
    row("PSM1", t.reached_psm1, t.error_psm1);
    row("PSM2", t.reached_psm2, t.error_psm2);
  }
  return s.str();
}

std::string deviation_csv(const std::vector<DeviationRow>& rows) {
  std::ostringstream s;
  s << "radius_mm,std_mm,maxdev_mm\n";
  for (const auto& r : rows) s << fixed(r.radius_mm, 3) << ',' << fixed(r.std_dev_mm) << ',' << fixed(r.max_dev_mm) << '\n';
  return s.str();
}

std::string waypoint_csv(const std::vector<sim::TrajectoryTrial>& trials) {
  std::ostringstream s;
  s << "radius_mm,index,series,x_mm,y_mm,z_mm\n";
  auto rows = [&](double radius, const std::string& series, const PointList& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s << fixed(radius / kMillimeter, 3) << ',' << i << ',' << series << ',' << fixed(pts[i].x() / kMillimeter) << ','
        << fixed(pts[i].y() / kMillimeter) << ',' << fixed(pts[i].z() / kMillimeter) << '\n';
    }
  };
  for (const auto& t : trials) {
    rows(t.radius, "command", t.waypoints);
    for (const auto& [tool, pts] : t.executed) rows(t.radius, tool.name, pts);
  }
  return s.str();
}

json stats_json(const ErrorStats& s) {
  return {{"n", s.n}, {"mean_mm", s.mean}, {"std_mm", s.std}, {"max_mm", s.max}};
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
      return kExitParse;
    case ErrorCode::UnknownTool:
      return kExitLookup;
    default:
      return kExitGeometry;
  }
}

int cmd_calibrate(const std::string& session_path, const std::string& output_path, std::ostream& out,
                  std::ostream& err) {
  try {
    const io::SessionFile session = io::load_session(session_path);
    const std::vector<MeasurementSet> measurements = io::load_session_measurements(session);
    const CalibrationResult result = calibrate(measurements, session.ransac);

    std::vector<std::string> notes;
    for (const auto& m : measurements) {
      const std::size_t kept = result.frame(m.tool).plane_fit.inliers.size();
      if (kept < m.dot_points.size()) {
        notes.push_back("tool " + m.tool.name + ": RANSAC kept " + std::to_string(kept) + " of " +
                        std::to_string(m.dot_points.size()) + " dots; the origin uses inliers only");
      }
    }
    const json j = io::calibration_to_json(result, session.warn_threshold_m, notes);
    io::write_text_file(output_path, j.dump(2) + "\n");

    for (const auto& w : j["warnings"]) err << "warning: " << w.get<std::string>() << '\n';
    out << "calibrated " << result.tools.size() << " tools -> " << output_path << '\n';
    for (const auto& id : result.tools) {
      out << "  " << id.name << ": plane residual " << fixed(result.residuals.at(id) / kMillimeter, 4) << " mm\n";
    }
    for (const auto& [pair, c] : result.cross_check) {
      out << "  cross-check " << pair.first.name << '/' << pair.second.name << ": " << fixed(c.translation_m / kMillimeter, 4)
          << " mm, " << fixed(c.rotation_rad * 180.0 / std::numbers::pi, 4) << " deg\n";
    }
    return kExitOk;
  } catch (const CalibrationError& e) {
    return report_error(e, err);
  }
}

int cmd_simulate(const std::string& config_path, const std::string& output_dir_override, std::ostream& out,
                 std::ostream& err) {
  try {
    io::SimulateConfig cfg = io::load_simulate_config(config_path);
    if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
    const sim::CampaignReport report = sim::run_campaign(cfg.campaign);

    json summary;
    summary["seed"] = cfg.campaign.seed;
    if (!report.grasp.empty()) {
      const double intrinsic =
          cfg.intrinsic_mm.value_or(cfg.campaign.grasp_noise.kinematic.sigma0 / kMillimeter * std::sqrt(8.0 / std::numbers::pi));
      json g = stats_json(report.grasp_stats);
      g["intrinsic_mm"] = intrinsic;
      if (report.grasp_stats.mean >= intrinsic) {
        g["calibration_error_mm"] = decompose_error(report.grasp_stats.mean, intrinsic);
      } else {
        g["calibration_error_mm"] = nullptr;
      }
      summary["grasp"] = g;
      io::write_text_file(cfg.output_dir / "grasp.csv", grasp_csv(report.grasp));
    }
    if (report.consistency_stats.n > 0) summary["consistency"] = stats_json(report.consistency_stats);
    if (!report.trajectory_rows.empty()) {
      json rows = json::array();
      for (const auto& r : report.trajectory_mean) {
        rows.push_back({{"radius_mm", r.radius_mm}, {"std_mm", r.std_dev_mm}, {"maxdev_mm", r.max_dev_mm}});
      }
      summary["trajectory"] = {{"repetitions", report.trajectory_rows.size()},
                               {"monotone_fraction", report.trajectory_monotone_fraction},
                               {"rows", rows}};
      io::write_text_file(cfg.output_dir / "trajectory.csv", deviation_csv(report.trajectory_mean));
      io::write_text_file(cfg.output_dir / "trajectory_waypoints.csv", waypoint_csv(report.trajectory_example));
    }
    io::write_text_file(cfg.output_dir / "summary.json", summary.dump(2) + "\n");

    out << "simulation written to " << cfg.output_dir.string() << '\n';
    if (summary.contains("grasp")) {
      out << "  grasp: mean " << fixed(report.grasp_stats.mean, 3) << " mm, std " << fixed(report.grasp_stats.std, 3)
          << " mm, max " << fixed(report.grasp_stats.max, 3) << " mm over " << report.grasp_stats.n << " grasps\n";
    }
    if (summary.contains("trajectory")) {
      for (const auto& r : report.trajectory_mean) {
        out << "  trajectory r=" << fixed(r.radius_mm, 0) << " mm: std " << fixed(r.std_dev_mm, 3) << " mm, max dev "
            << fixed(r.max_dev_mm, 3) << " mm\n";
      }
    }
    return kExitOk;
  } catch (const CalibrationError& e) {
    return report_error(e, err);
  }
}

int cmd_transform(const std::string& calib_path, const std::string& from, const std::string& to, const Point3& point,
                  io::Units units, std::ostream& out, std::ostream& err) {
  try {
    const CalibrationResult calib = io::load_calibration(calib_path);
    const RigidTransform t = tool_to_tool(calib, ToolId{from}, ToolId{to});
    const double scale = io::to_meters(units);
    const Point3 mapped = apply(t, point * scale) / scale;
    out << std::setprecision(17) << mapped.x() << ' ' << mapped.y() << ' ' << mapped.z() << '\n';
    return kExitOk;
  } catch (const CalibrationError& e) {
    return report_error(e, err);
  }
}

int cmd_evaluate(const std::string& calib_path, const std::vector<std::string>& measurement_specs, io::Units units,
                 std::ostream& out, std::ostream& err) {
  try {
    const CalibrationResult calib = io::load_calibration(calib_path);
    std::vector<MeasurementSet> sets;
    for (const auto& spec : measurement_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw CalibrationError(ErrorCode::ParseError, "measurement must be TOOL=path, got '" + spec + "'");
      }
      const ToolId tool{spec.substr(0, eq)};
      (void)calib.frame(tool);
      sets.push_back(io::load_measurement(spec.substr(eq + 1), tool, units));
      sets.back().validate();
    }
    if (sets.empty()) throw CalibrationError(ErrorCode::ParseError, "no measurements given");

    // Every measured point, dots then above-point, in the common frame.
    std::map<ToolId, PointList> common;
    json report;
    json tools = json::object();
    for (const auto& m : sets) {
      PointList pts = m.dot_points;
      pts.push_back(m.above_point);
      if (pts.size() != sets.front().dot_points.size() + 1) {
        throw CalibrationError(ErrorCode::OrderMismatch, "tool " + m.tool.name + " has a different dot count");
      }
      PointList mapped = apply_all(calib.frame(m.tool).tool_to_common, pts);
      double sum_sq = 0.0;
      for (std::size_t i = 0; i + 1 < mapped.size(); ++i) sum_sq += mapped[i].z() * mapped[i].z();
      tools[m.tool.name] = {{"dot_out_of_plane_rms_mm", std::sqrt(sum_sq / static_cast<double>(mapped.size() - 1)) / kMillimeter}};
      common[m.tool] = std::move(mapped);
    }
    report["tools"] = tools;
    json pairs = json::array();
    for (auto a = common.begin(); a != common.end(); ++a) {
      for (auto b = std::next(a); b != common.end(); ++b) {
        json entry = stats_json(plane_consistency_check(a->second, b->second));
        entry["a"] = a->first.name;
        entry["b"] = b->first.name;
        pairs.push_back(entry);
      }
    }
    report["pairs"] = pairs;
    out << report.dump(2) << '\n';
    return kExitOk;
  } catch (const CalibrationError& e) {
    return report_error(e, err);
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rigid multi-arm and camera calibration from touched board points"};
  app.require_subcommand(1);

  std::string session, output = "calibration.json";
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate all tools from a session file");
  calibrate_cmd->add_option("session", session, "Session JSON")->required();
  calibrate_cmd->add_option("-o,--output", output, "Calibration file to write");

  std::string config, output_dir;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the synthetic grasp and trajectory experiments");
  simulate_cmd->add_option("config", config, "Experiment config JSON")->required();
  simulate_cmd->add_option("-o,--output-dir", output_dir, "Override the config's output directory");

  std::string calib, from, to, units_name = "m";
  std::vector<double> xyz;
  auto* transform_cmd = app.add_subcommand("transform", "Map a point from one tool frame to another");
  transform_cmd->add_option("calibration", calib, "Calibration JSON")->required();
  transform_cmd->add_option("from", from, "Source tool")->required();
  transform_cmd->add_option("to", to, "Target tool")->required();
  transform_cmd->add_option("xyz", xyz, "Point coordinates")->required()->expected(3);
  transform_cmd->add_option("--units", units_name, "m or mm")->check(CLI::IsMember({"m", "mm"}));

  std::vector<std::string> specs;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare measurements of several tools in the common frame");
  evaluate_cmd->add_option("calibration", calib, "Calibration JSON")->required();
  evaluate_cmd->add_option("measurements", specs, "TOOL=path entries")->required();
  evaluate_cmd->add_option("--units", units_name, "m or mm")->check(CLI::IsMember({"m", "mm"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  if (*calibrate_cmd) return cmd_calibrate(session, output, out, err);
  if (*simulate_cmd) return cmd_simulate(config, output_dir, out, err);
  const io::Units units = io::parse_units(units_name);
  if (*transform_cmd) return cmd_transform(calib, from, to, Point3(xyz[0], xyz[1], xyz[2]), units, out, err);
  return cmd_evaluate(calib, specs, units, out, err);
}

}  // namespace rigidcal::cli

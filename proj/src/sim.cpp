#include "rigidcal/sim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rigidcal/error.hpp"

namespace rigidcal::sim {

namespace {

const ToolId kCam{"CAM"};
const ToolId kPsm1{"PSM1"};
const ToolId kPsm2{"PSM2"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Point3 gaussian_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double x = n(rng), y = n(rng), z = n(rng);
  return {x, y, z};
}

// Commanded point (tool frame) -> reached point in the ground-truth board frame.
Point3 execute(const GroundTruthScene& scene, const ToolId& arm, const Point3& command_tool,
               double sigma, std::mt19937_64& rng) {
  const Point3 actual = command_tool + sigma * gaussian_unit(rng);
  return apply(invert(scene.board_pose), apply(scene.pose(arm), actual));
}

void require_tools(const CalibrationResult& calib, std::initializer_list<ToolId> ids) {
  for (const auto& id : ids) (void)calib.frame(id);
}

}  // namespace

void NoiseModel::validate() const {
  if (!(sigma0 >= 0.0) || !std::isfinite(sigma0)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "noise sigma0 must be >= 0");
  }
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "noise slope k must be >= 0");
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Point3 perturb(const Point3& p, const NoiseModel& noise, std::mt19937_64& rng) {
  return p + noise.sigma_at(p) * gaussian_unit(rng);
}

RigidTransform random_rotation(std::mt19937_64& rng) {
  // Shoemake's subgroup algorithm: uniform on SO(3).
  const double u1 = uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double u3 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  return RigidTransform::from_rotation(
      UnitQuaternion(b * std::cos(u3), a * std::sin(u2), a * std::cos(u2), b * std::sin(u3)));
}

ToolId default_tool_name(std::size_t index) {
  switch (index) {
    case 0: return kPsm1;
    case 1: return kPsm2;
    case 2: return kCam;
    default: return ToolId{"TOOL" + std::to_string(index + 1)};
  }
}

const RigidTransform& GroundTruthScene::pose(const ToolId& id) const {
  auto it = true_poses.find(id);
  if (it == true_poses.end()) throw CalibrationError(ErrorCode::UnknownTool, "scene has no tool " + id.name);
  return it->second;
}

RigidTransform GroundTruthScene::board_in_tool(const ToolId& id) const {
  return compose(invert(pose(id)), board_pose);
}

RigidTransform GroundTruthScene::true_tool_to_tool(const ToolId& a, const ToolId& b) const {
  return compose(invert(pose(b)), pose(a));
}

GroundTruthScene make_scene(std::uint64_t seed, std::size_t n_tools, const BoardModel& board) {
  if (n_tools < 2) throw CalibrationError(ErrorCode::InvalidArgument, "a scene needs at least 2 tools");
  std::mt19937_64 rng(derive_seed(seed, 0));
  GroundTruthScene scene{{}, {}, {}, board};

  const RigidTransform board_rot = random_rotation(rng);
  const Point3 board_t(uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05));
  scene.board_pose = RigidTransform(board_rot.rotation(), board_t);

  for (std::size_t i = 0; i < n_tools; ++i) {
    const ToolId id = default_tool_name(i);
    const RigidTransform rot = random_rotation(rng);
    const Point3 t(uniform(rng, -0.15, 0.15), uniform(rng, -0.15, 0.15), uniform(rng, -0.15, 0.15));
    scene.tools.push_back(id);
    scene.true_poses[id] = RigidTransform(rot.rotation(), t);
  }
  return scene;
}

CalibrationResult ground_truth_calibration(const GroundTruthScene& scene) {
  CalibrationResult r;
  for (const auto& id : scene.tools) {
    CommonFrame f;
    f.tool = id;
    f.tool_to_common = invert(scene.board_in_tool(id));
    f.origin = scene.board_in_tool(id).translation();
    r.tools.push_back(id);
    r.residuals[id] = 0.0;
    r.frames.emplace(id, std::move(f));
  }
  return r;
}

std::vector<MeasurementSet> simulate_measurements(const GroundTruthScene& scene, const NoiseModel& noise) {
  noise.validate();
  std::vector<MeasurementSet> out;
  out.reserve(scene.tools.size());
  for (std::size_t i = 0; i < scene.tools.size(); ++i) {
    const ToolId& id = scene.tools[i];
    std::mt19937_64 rng(derive_seed(noise.seed, i));
    // Arms and camera alike see the board through its pose in their own frame.
    PointList pts = board_points_camera_frame(MarkerPose{scene.board_in_tool(id)}, scene.board);
    for (auto& p : pts) p = perturb(p, noise, rng);

    MeasurementSet m;
    m.tool = id;
    m.above_point = pts.back();
    pts.pop_back();
    m.dot_points = std::move(pts);
    out.push_back(std::move(m));
  }
  return out;
}

PointList default_ring_centers() {
  return {
      {0.0, 0.0, 0.0},                                            // center
      {0.0, -0.02, 0.0},   {0.0, -0.04, 0.0},                     // one side
      {0.0, 0.02, 0.0},    {0.0, 0.04, 0.0},                      // other side
      {0.04, 0.04, 0.0},   {0.04, -0.04, 0.0},                    // corners
      {-0.04, 0.04, 0.0},  {-0.04, -0.04, 0.0},
  };
}

std::vector<GraspTrial> run_grasp_experiment(const GroundTruthScene& scene, const CalibrationResult& calib,
                                             const PointList& ring_centers, const ExperimentNoise& noise,
                                             double ring_diameter) {
  noise.camera.validate();
  noise.kinematic.validate();
  require_tools(calib, {kCam, kPsm1, kPsm2});
  if (!(ring_diameter > 0.0)) throw CalibrationError(ErrorCode::InvalidArgument, "ring diameter must be positive");

  const RigidTransform cam_pose = scene.pose(kCam);
  const RigidTransform cam_to_common = calib.frame(kCam).tool_to_common;
  const Eigen::Vector3d half = Eigen::Vector3d::UnitY() * (0.5 * ring_diameter);

  std::vector<GraspTrial> trials;
  trials.reserve(ring_centers.size());
  for (std::size_t i = 0; i < ring_centers.size(); ++i) {
    GraspTrial trial;
    trial.ring_center = ring_centers[i];
    trial.ring_diameter = ring_diameter;
    // PSM1 takes the rightmost (-y) point, PSM2 the leftmost (+y).
    trial.target_psm1 = ring_centers[i] - half;
    trial.target_psm2 = ring_centers[i] + half;

    std::mt19937_64 cam_rng(derive_seed(noise.camera.seed, i));
    std::mt19937_64 kin_rng(derive_seed(noise.kinematic.seed, i));

    auto grasp = [&](const ToolId& arm, const Point3& target_board, Point3& reached) {
      const Point3 seen = perturb(apply(invert(cam_pose), apply(scene.board_pose, target_board)),
                                  noise.camera, cam_rng);
      const Point3 estimate_common = apply(cam_to_common, seen);
      const Point3 command = apply(invert(calib.frame(arm).tool_to_common), estimate_common);
      reached = execute(scene, arm, command, noise.kinematic.sigma_at(estimate_common), kin_rng);
      return (reached - target_board).norm();
    };
    trial.error_psm1 = grasp(kPsm1, trial.target_psm1, trial.reached_psm1);
    trial.error_psm2 = grasp(kPsm2, trial.target_psm2, trial.reached_psm2);
    trials.push_back(trial);
  }
  return trials;
}

PointList circle_waypoints(double radius, const TrajectoryOptions& options) {
  if (!(radius > 0.0)) throw CalibrationError(ErrorCode::InvalidArgument, "radius must be positive");
  if (options.waypoints < 2) throw CalibrationError(ErrorCode::InvalidArgument, "need at least 2 waypoints");
  PointList wp;
  wp.reserve(options.waypoints);
  for (std::size_t j = 0; j < options.waypoints; ++j) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(options.waypoints);
    wp.push_back(options.start + radius * Point3(std::sin(phi), 0.0, 1.0 - std::cos(phi)));
  }
  return wp;
}

std::vector<TrajectoryTrial> run_trajectory_experiment(const GroundTruthScene& scene,
                                                       const CalibrationResult& calib,
                                                       const std::vector<double>& radii,
                                                       const NoiseModel& kinematic,
                                                       const TrajectoryOptions& options) {
  kinematic.validate();
  require_tools(calib, {kPsm1, kPsm2});
  std::vector<TrajectoryTrial> trials;
  trials.reserve(radii.size());
  for (std::size_t r = 0; r < radii.size(); ++r) {
    TrajectoryTrial trial;
    trial.radius = radii[r];
    trial.waypoints = circle_waypoints(radii[r], options);
    std::size_t arm_index = 0;
    for (const ToolId& arm : {kPsm1, kPsm2}) {
      std::mt19937_64 rng(derive_seed(kinematic.seed, 2 * r + arm_index++));
      const RigidTransform common_to_arm = invert(calib.frame(arm).tool_to_common);
      PointList executed;
      executed.reserve(trial.waypoints.size());
      for (const auto& wp : trial.waypoints) {
        executed.push_back(execute(scene, arm, apply(common_to_arm, wp), kinematic.sigma_at(wp), rng));
      }
      trial.executed[arm] = std::move(executed);
    }
    trials.push_back(std::move(trial));
  }
  return trials;
}

PointList default_consistency_poses() {
  PointList poses;
  for (double x : {-0.03, 0.0, 0.03}) {
    for (double y : {-0.03, 0.0, 0.03}) poses.emplace_back(x, y, 0.05);
  }
  return poses;
}

ConsistencyTrial run_consistency_experiment(const GroundTruthScene& scene, const CalibrationResult& calib,
                                            const PointList& poses, const NoiseModel& kinematic) {
  kinematic.validate();
  require_tools(calib, {kPsm1, kPsm2});
  ConsistencyTrial trial;
  trial.commanded = poses;
  std::mt19937_64 rng1(derive_seed(kinematic.seed, 0));
  std::mt19937_64 rng2(derive_seed(kinematic.seed, 1));
  const RigidTransform to_psm1 = invert(calib.frame(kPsm1).tool_to_common);
  const RigidTransform to_psm2 = invert(calib.frame(kPsm2).tool_to_common);
  for (const auto& p : poses) {
    trial.reached_psm1.push_back(execute(scene, kPsm1, apply(to_psm1, p), kinematic.sigma_at(p), rng1));
    trial.reached_psm2.push_back(execute(scene, kPsm2, apply(to_psm2, p), kinematic.sigma_at(p), rng2));
  }
  return trial;
}

void CampaignConfig::validate() const {
  ransac.validate();
  calibration_noise.validate();
  grasp_noise.camera.validate();
  grasp_noise.kinematic.validate();
  trajectory_noise.validate();
  consistency_noise.validate();
  if (n_tools < 2) throw CalibrationError(ErrorCode::InvalidArgument, "n_tools must be >= 2");
  if (grasp_repetitions > 0 && n_tools < 3) {
    throw CalibrationError(ErrorCode::InvalidArgument, "the grasp experiment needs a camera (n_tools >= 3)");
  }
  if (grasp_repetitions > 0 && ring_centers.empty()) {
    throw CalibrationError(ErrorCode::InvalidArgument, "no ring positions");
  }
  if (trajectory_repetitions > 0 && radii.empty()) {
    throw CalibrationError(ErrorCode::InvalidArgument, "no trajectory radii");
  }
  for (double r : radii) {
    if (!(r > 0.0)) throw CalibrationError(ErrorCode::InvalidArgument, "radii must be positive");
  }
  if (trajectory.waypoints < 2) throw CalibrationError(ErrorCode::InvalidArgument, "need at least 2 waypoints");
}

GroundTruthScene campaign_scene(const CampaignConfig& config, std::uint64_t stream, std::size_t rep) {
  return make_scene(derive_seed(derive_seed(config.seed, stream), rep), config.n_tools, config.board);
}

CalibrationResult campaign_calibration(const CampaignConfig& config, const GroundTruthScene& scene,
                                       std::uint64_t stream, std::size_t rep) {
  NoiseModel noise = config.calibration_noise;
  noise.seed = derive_seed(derive_seed(config.seed, stream + 100), rep);
  return calibrate(simulate_measurements(scene, noise), config.ransac);
}

CampaignReport run_campaign(const CampaignConfig& config) {
  config.validate();
  CampaignReport report;

  constexpr std::uint64_t kGraspStream = 1;
  constexpr std::uint64_t kTrajectoryStream = 2;

  std::vector<double> grasp_errors_mm;
  std::vector<double> consistency_mm;
  for (std::size_t rep = 0; rep < config.grasp_repetitions; ++rep) {
    const GroundTruthScene scene = campaign_scene(config, kGraspStream, rep);
    const CalibrationResult calib = campaign_calibration(config, scene, kGraspStream, rep);

    ExperimentNoise noise = config.grasp_noise;
    noise.camera.seed = derive_seed(derive_seed(config.seed, 10), rep);
    noise.kinematic.seed = derive_seed(derive_seed(config.seed, 11), rep);
    for (auto& t : run_grasp_experiment(scene, calib, config.ring_centers, noise, config.ring_diameter)) {
      grasp_errors_mm.push_back(t.error_psm1 / kMillimeter);
      grasp_errors_mm.push_back(t.error_psm2 / kMillimeter);
      report.grasp.push_back(t);
    }

    if (!config.consistency_poses.empty()) {
      NoiseModel kin = config.consistency_noise;
      kin.seed = derive_seed(derive_seed(config.seed, 12), rep);
      const ConsistencyTrial c = run_consistency_experiment(scene, calib, config.consistency_poses, kin);
      for (std::size_t i = 0; i < c.commanded.size(); ++i) {
        consistency_mm.push_back((c.reached_psm1[i] - c.reached_psm2[i]).norm() / kMillimeter);
      }
    }
  }
  if (!grasp_errors_mm.empty()) report.grasp_stats = error_stats(grasp_errors_mm);
  if (!consistency_mm.empty()) report.consistency_stats = error_stats(consistency_mm);

  report.trajectory_mean.resize(config.radii.size());
  for (std::size_t r = 0; r < config.radii.size(); ++r) report.trajectory_mean[r].radius_mm = config.radii[r] / kMillimeter;
  std::size_t monotone = 0;
  for (std::size_t rep = 0; rep < config.trajectory_repetitions; ++rep) {
    const GroundTruthScene scene = campaign_scene(config, kTrajectoryStream, rep);
    const CalibrationResult calib = campaign_calibration(config, scene, kTrajectoryStream, rep);
    NoiseModel kin = config.trajectory_noise;
    kin.seed = derive_seed(derive_seed(config.seed, 13), rep);
    std::vector<TrajectoryTrial> trials =
        run_trajectory_experiment(scene, calib, config.radii, kin, config.trajectory);

    std::vector<DeviationRow> rows;
    bool non_decreasing = true;
    for (std::size_t r = 0; r < trials.size(); ++r) {
      DeviationRow row = trajectory_deviation(trials[r].executed.at(kPsm1), trials[r].executed.at(kPsm2));
      row.radius_mm = config.radii[r] / kMillimeter;
      if (r > 0 && row.std_dev_mm < rows.back().std_dev_mm) non_decreasing = false;
      report.trajectory_mean[r].std_dev_mm += row.std_dev_mm;
      report.trajectory_mean[r].max_dev_mm += row.max_dev_mm;
      rows.push_back(row);
    }
    if (non_decreasing) ++monotone;
    report.trajectory_rows.push_back(std::move(rows));
    if (rep == 0) report.trajectory_example = std::move(trials);
  }
  if (config.trajectory_repetitions > 0) {
    const double reps = static_cast<double>(config.trajectory_repetitions);
    for (auto& row : report.trajectory_mean) {
      row.std_dev_mm /= reps;
      row.max_dev_mm /= reps;
    }
    report.trajectory_monotone_fraction = static_cast<double>(monotone) / reps;
  }
  return report;
}

}  // namespace rigidcal::sim

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "rigidcal/board.hpp"
#include "rigidcal/frame.hpp"
#include "rigidcal/metrics.hpp"

namespace rigidcal::sim {

// Isotropic Gaussian noise with std sigma(p) = sigma0 + k * |p|.
struct NoiseModel {
  double sigma0 = 0.0;  // meters
  double k = 0.0;       // dimensionless workspace growth
  std::uint64_t seed = 0;

  double sigma_at(const Point3& p) const { return sigma0 + k * p.norm(); }
  void validate() const;  // InvalidArgument when sigma0 < 0 or k < 0
};

// Deterministic per-item seed; results do not depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Draws p + sigma(p) * z with z ~ N(0, I3). Scaling a unit draw keeps the same
// seed structure across noise levels.
Point3 perturb(const Point3& p, const NoiseModel& noise, std::mt19937_64& rng);

RigidTransform random_rotation(std::mt19937_64& rng);

// Default tool naming: PSM1, PSM2, CAM, then TOOL4, TOOL5, ...
ToolId default_tool_name(std::size_t index);

struct GroundTruthScene {
  std::vector<ToolId> tools;
  std::map<ToolId, RigidTransform> true_poses;  // tool frame -> world
  RigidTransform board_pose;                    // board frame -> world
  BoardModel board;

  const RigidTransform& pose(const ToolId& id) const;  // throws UnknownTool
  RigidTransform board_in_tool(const ToolId& id) const;
  RigidTransform true_tool_to_tool(const ToolId& a, const ToolId& b) const;
};

// Tool translations uniform in a 0.3 m cube centered on the world origin,
// uniform random rotations, board near the origin.
GroundTruthScene make_scene(std::uint64_t seed, std::size_t n_tools, const BoardModel& board = {});

// Exact calibration (common frame = board frame) for use as an experiment baseline.
CalibrationResult ground_truth_calibration(const GroundTruthScene& scene);

// Board points seen from each tool, perturbed with sigma(p) evaluated in the tool frame.
std::vector<MeasurementSet> simulate_measurements(const GroundTruthScene& scene, const NoiseModel& noise);

struct ExperimentNoise {
  NoiseModel camera{0.0, 0.0, 1};                // ring observation noise
  NoiseModel kinematic{1.02 * kMillimeter, 0.0, 2};  // arm positioning noise
};

// Points are expressed in the ground-truth board frame.
struct GraspTrial {
  Point3 ring_center = Point3::Zero();
  double ring_diameter = 0.015;
  Point3 target_psm1 = Point3::Zero();
  Point3 target_psm2 = Point3::Zero();
  Point3 reached_psm1 = Point3::Zero();
  Point3 reached_psm2 = Point3::Zero();
  double error_psm1 = 0.0;  // meters
  double error_psm2 = 0.0;
};

// Center, two positions on each side, and the four corners of the peg base.
PointList default_ring_centers();

std::vector<GraspTrial> run_grasp_experiment(const GroundTruthScene& scene, const CalibrationResult& calib,
                                             const PointList& ring_centers, const ExperimentNoise& noise,
                                             double ring_diameter = 0.015);

struct TrajectoryOptions {
  std::size_t waypoints = 360;
  Point3 start = Point3::Zero();  // shared first waypoint, common frame
};

struct TrajectoryTrial {
  double radius = 0.0;
  PointList waypoints;                  // common frame
  std::map<ToolId, PointList> executed;  // ground-truth board frame
};

// Circle in the common x-z plane through `start`. Kinematic noise sigma is
// evaluated at each waypoint's distance from the board origin.
PointList circle_waypoints(double radius, const TrajectoryOptions& options);

std::vector<TrajectoryTrial> run_trajectory_experiment(const GroundTruthScene& scene,
                                                       const CalibrationResult& calib,
                                                       const std::vector<double>& radii,
                                                       const NoiseModel& kinematic,
                                                       const TrajectoryOptions& options = {});

struct ConsistencyTrial {
  PointList commanded;    // common frame
  PointList reached_psm1;  // ground-truth board frame
  PointList reached_psm2;
};

// Default poses: 5 cm above the board, inside the dot circle.
PointList default_consistency_poses();

ConsistencyTrial run_consistency_experiment(const GroundTruthScene& scene, const CalibrationResult& calib,
                                            const PointList& poses, const NoiseModel& kinematic);

// Repeated experiments over freshly drawn scenes and calibrations.
struct CampaignConfig {
  std::uint64_t seed = 0;
  std::size_t n_tools = 3;
  BoardModel board;
  RansacParams ransac{4.0 * kMillimeter, 500, 3, 0};
  NoiseModel calibration_noise{0.5 * kMillimeter, 0.0, 0};
  ExperimentNoise grasp_noise;
  NoiseModel trajectory_noise{0.05 * kMillimeter, 0.015, 0};
  NoiseModel consistency_noise{0.0, 0.0, 0};

  std::size_t grasp_repetitions = 56;
  double ring_diameter = 0.015;
  PointList ring_centers = default_ring_centers();

  std::size_t trajectory_repetitions = 100;
  std::vector<double> radii{0.01, 0.02, 0.03, 0.04, 0.05};
  TrajectoryOptions trajectory;

  PointList consistency_poses = default_consistency_poses();

  void validate() const;
};

struct CampaignReport {
  std::vector<GraspTrial> grasp;
  ErrorStats grasp_stats;  // over both arms' errors, mm

  // rows[rep][radius index]
  std::vector<std::vector<DeviationRow>> trajectory_rows;
  std::vector<DeviationRow> trajectory_mean;  // per radius, averaged over repetitions
  double trajectory_monotone_fraction = 0.0;  // reps with non-decreasing std across radii
  std::vector<TrajectoryTrial> trajectory_example;  // first repetition, for plotting

  ErrorStats consistency_stats;
};

// Fresh scene, noisy calibration and experiment seeds for repetition `rep`.
GroundTruthScene campaign_scene(const CampaignConfig& config, std::uint64_t stream, std::size_t rep);
CalibrationResult campaign_calibration(const CampaignConfig& config, const GroundTruthScene& scene,
                                       std::uint64_t stream, std::size_t rep);

CampaignReport run_campaign(const CampaignConfig& config);

}  // namespace rigidcal::sim

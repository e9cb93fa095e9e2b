#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rigidcal/error.hpp"
#include "rigidcal/metrics.hpp"
#include "rigidcal/sim.hpp"
#include "support.hpp"

using namespace rigidcal;
using namespace rigidcal::sim;
using namespace rigidcal::testing;

namespace {

constexpr double kTol = 1e-9;
const ToolId kCam{"CAM"}, kPsm1{"PSM1"}, kPsm2{"PSM2"};

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const CalibrationError& e) {
    return e.code();
  }
  FAIL("expected CalibrationError");
  return ErrorCode::InvalidArgument;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> grasp_errors_mm(const CampaignReport& r) {
  std::vector<double> e;
  for (const auto& t : r.grasp) {
    e.push_back(t.error_psm1 / kMillimeter);
    e.push_back(t.error_psm2 / kMillimeter);
  }
  return e;
}

CampaignConfig grasp_only(std::size_t reps) {
  CampaignConfig c;
  c.grasp_repetitions = reps;
  c.trajectory_repetitions = 0;
  return c;
}

}  // namespace

TEST_CASE("scenes are deterministic and seed dependent") {
  const GroundTruthScene a = make_scene(0, 3), b = make_scene(0, 3), c = make_scene(1, 3);
  CHECK(a.tools == std::vector<ToolId>{kPsm1, kPsm2, kCam});
  CHECK(a.board_pose == b.board_pose);
  for (const auto& id : a.tools) {
    CHECK(a.pose(id) == b.pose(id));
    CHECK_FALSE(a.pose(id) == c.pose(id));
  }
  const GroundTruthScene big = make_scene(5, 5);
  CHECK(big.tools.back().name == "TOOL5");
  for (const auto& id : big.tools) CHECK(big.pose(id).translation().cwiseAbs().maxCoeff() <= 0.15);
  CHECK(big.board_pose.translation().cwiseAbs().maxCoeff() <= 0.05);
  CHECK(code_of([] { make_scene(0, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { a.pose(ToolId{"X"}); }) == ErrorCode::UnknownTool);
}

TEST_CASE("derive_seed spreads indices") {
  CHECK(derive_seed(0, 0) != derive_seed(0, 1));
  CHECK(derive_seed(0, 1) != derive_seed(1, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("noiseless measurements match independent per-point mapping") {
  const GroundTruthScene s = make_scene(2, 3);
  const auto sets = simulate_measurements(s, NoiseModel{});
  const PointList local = board_points_marker_frame(s.board);
  REQUIRE(sets.size() == 3);
  for (const auto& m : sets) {
    // world = pose(tool) * p_tool and world = board_pose * p_board
    const RigidTransform& tool = s.pose(m.tool);
    for (std::size_t i = 0; i < m.dot_points.size(); ++i) {
      CHECK((apply_by_matrix(tool, m.dot_points[i]) - apply_by_matrix(s.board_pose, local[i])).norm() <= kTol);
    }
    CHECK((apply_by_matrix(tool, m.above_point) - apply_by_matrix(s.board_pose, local.back())).norm() <= kTol);
  }
  // Relative poses agree with the point sets.
  for (const auto& a : sets)
    for (const auto& b : sets) {
      const RigidTransform t = s.true_tool_to_tool(a.tool, b.tool);
      for (std::size_t i = 0; i < a.dot_points.size(); ++i)
        CHECK((apply(t, a.dot_points[i]) - b.dot_points[i]).norm() <= kTol);
    }
}

TEST_CASE("measurement noise has the configured spread") {
  const GroundTruthScene s = make_scene(3, 2);
  const auto exact = simulate_measurements(s, NoiseModel{});
  std::vector<double> comps;
  for (std::uint64_t seed = 0; comps.size() < 30000; ++seed) {
    const auto noisy = simulate_measurements(s, NoiseModel{0.5 * kMillimeter, 0.0, seed});
    for (std::size_t t = 0; t < noisy.size(); ++t)
      for (std::size_t i = 0; i < noisy[t].dot_points.size(); ++i) {
        const Point3 d = (noisy[t].dot_points[i] - exact[t].dot_points[i]) / kMillimeter;
        comps.insert(comps.end(), {d.x(), d.y(), d.z()});
      }
  }
  // 10,000 points, three components each.
  comps.resize(30000);
  const double sd = error_stats(comps).std;
  CHECK(sd >= 0.4);
  CHECK(sd <= 0.6);
  CHECK(sd == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("workspace noise grows with distance") {
  const NoiseModel n{0.1 * kMillimeter, 0.02, 9};
  CHECK(n.sigma_at({0.1, 0, 0}) > n.sigma_at({0.01, 0, 0}));
  std::mt19937_64 rng(1);
  auto spread = [&](const Point3& p) {
    std::vector<double> d;
    for (int i = 0; i < 5000; ++i) d.push_back((perturb(p, n, rng) - p).x());
    return error_stats(d).std;
  };
  CHECK(spread({0.1, 0, 0}) > spread({0.01, 0, 0}));
  CHECK(code_of([] { NoiseModel{-1.0, 0.0, 0}.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { NoiseModel{0.0, -0.1, 0}.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("random rotations are uniform enough") {
  // E[trace R] = 0 for the Haar measure; the trace has variance 1.
  std::mt19937_64 rng(4);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += random_rotation(rng).rotation().matrix().trace();
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("noiseless end to end recovers every pairwise pose") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GroundTruthScene s = make_scene(seed, 4);
    const CalibrationResult r = calibrate(simulate_measurements(s, NoiseModel{}), RansacParams{});
    for (const auto& a : s.tools)
      for (const auto& b : s.tools) {
        const RigidTransform got = tool_to_tool(r, a, b), want = s.true_tool_to_tool(a, b);
        CHECK(translation_gap(got, want) <= kTol);
        CHECK(rotation_gap(got, want) <= kTol);
      }
  }
}

TEST_CASE("ground-truth calibration maps tools into the board frame") {
  const GroundTruthScene s = make_scene(6, 3);
  const CalibrationResult r = ground_truth_calibration(s);
  const CalibrationResult est = calibrate(simulate_measurements(s, NoiseModel{}), RansacParams{});
  for (const auto& id : s.tools) {
    // The constructed frame coincides with the board frame for the default layout.
    CHECK(transforms_close(r.frame(id).tool_to_common, est.frame(id).tool_to_common, kTol));
  }
}

TEST_CASE("grasp experiment examples") {
  const GroundTruthScene s = make_scene(7, 3);
  const CalibrationResult truth = ground_truth_calibration(s);
  ExperimentNoise quiet;
  quiet.kinematic.sigma0 = 0.0;
  const auto trials = run_grasp_experiment(s, truth, default_ring_centers(), quiet);
  REQUIRE(trials.size() == 9);
  for (const auto& t : trials) {
    CHECK(t.error_psm1 <= kTol);
    CHECK(t.error_psm2 <= kTol);
    CHECK((t.target_psm2 - t.target_psm1 - Point3(0, 0.015, 0)).norm() <= 1e-15);
  }

  // Kinematic noise alone: mean of |N(0, s^2 I3)| is s * sqrt(8 / pi).
  std::vector<double> errs;
  for (std::uint64_t rep = 0; errs.size() < 540; ++rep) {
    ExperimentNoise noise;
    noise.kinematic.seed = derive_seed(77, rep);
    for (const auto& t : run_grasp_experiment(s, truth, default_ring_centers(), noise)) {
      errs.push_back(t.error_psm1 / kMillimeter);
      errs.push_back(t.error_psm2 / kMillimeter);
    }
  }
  const double expected = 1.02 * std::sqrt(8.0 / std::numbers::pi);
  CHECK(error_stats(errs).mean == doctest::Approx(expected).epsilon(0.10));

  CalibrationResult missing = truth;
  missing.frames.erase(kCam);
  CHECK(code_of([&] { run_grasp_experiment(s, missing, default_ring_centers(), quiet); }) == ErrorCode::UnknownTool);
  CHECK(code_of([&] { run_grasp_experiment(s, truth, default_ring_centers(), quiet, 0.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("noisy calibration grasp error lies in the expected band") {
  const CampaignReport r = run_campaign(grasp_only(28));
  CHECK(r.grasp_stats.n >= 500);
  CHECK(r.grasp_stats.mean >= 1.0);
  CHECK(r.grasp_stats.mean <= 3.0);
}

TEST_CASE("median grasp error does not decrease with calibration noise") {
  double previous = 0.0;
  for (double sigma_mm : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    CampaignConfig c = grasp_only(28);
    c.calibration_noise.sigma0 = sigma_mm * kMillimeter;
    c.ransac.inlier_threshold = std::max(4.0, 8.0 * sigma_mm) * kMillimeter;
    const double m = median(grasp_errors_mm(run_campaign(c)));
    CHECK(m >= previous);
    previous = m;
  }
}

TEST_CASE("median grasp error does not decrease with kinematic noise") {
  double previous = 0.0;
  for (double sigma_mm : {0.0, 0.5, 1.02, 2.0}) {
    CampaignConfig c = grasp_only(28);
    c.grasp_noise.kinematic.sigma0 = sigma_mm * kMillimeter;
    const double m = median(grasp_errors_mm(run_campaign(c)));
    CHECK(m >= previous);
    previous = m;
  }
}

TEST_CASE("trajectory examples") {
  const GroundTruthScene s = make_scene(8, 3);
  const CalibrationResult truth = ground_truth_calibration(s);
  const std::vector<double> radii{0.01, 0.02, 0.03, 0.04, 0.05};
  const auto quiet = run_trajectory_experiment(s, truth, radii, NoiseModel{});
  REQUIRE(quiet.size() == radii.size());
  for (const auto& t : quiet) {
    CHECK(t.waypoints.size() == 360);
    CHECK(t.waypoints.front() == quiet.front().waypoints.front());
    const DeviationRow row = trajectory_deviation(t.executed.at(kPsm1), t.executed.at(kPsm2));
    CHECK(row.std_dev_mm <= 1e-9);
    for (std::size_t i = 0; i < t.waypoints.size(); ++i)
      CHECK((t.executed.at(kPsm1)[i] - t.waypoints[i]).norm() <= kTol);
  }

  // Waypoints lie on a circle of the given radius in the x-z plane.
  TrajectoryOptions opt;
  opt.start = {0.01, 0.02, 0.0};
  const PointList wp = circle_waypoints(0.03, opt);
  const Point3 center = opt.start + Point3(0, 0, 0.03);
  for (const auto& p : wp) {
    CHECK(std::abs((p - center).norm() - 0.03) <= 1e-15);
    CHECK(p.y() == 0.02);
  }
  CHECK(code_of([] { circle_waypoints(0.0, {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { circle_waypoints(0.01, TrajectoryOptions{1, Point3::Zero()}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("trajectory deviation grows with radius under workspace noise") {
  CampaignConfig c;
  c.grasp_repetitions = 0;
  c.trajectory_repetitions = 100;
  const CampaignReport r = run_campaign(c);
  CHECK(r.trajectory_rows.size() == 100);
  CHECK(r.trajectory_monotone_fraction >= 0.9);
  for (std::size_t i = 1; i < r.trajectory_mean.size(); ++i)
    CHECK(r.trajectory_mean[i].std_dev_mm > r.trajectory_mean[i - 1].std_dev_mm);
}

TEST_CASE("consistency experiment") {
  const GroundTruthScene s = make_scene(9, 3);
  const CalibrationResult truth = ground_truth_calibration(s);
  const ConsistencyTrial quiet = run_consistency_experiment(s, truth, default_consistency_poses(), NoiseModel{});
  REQUIRE(quiet.commanded.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK((quiet.reached_psm1[i] - quiet.commanded[i]).norm() <= kTol);
    CHECK((quiet.reached_psm1[i] - quiet.reached_psm2[i]).norm() <= kTol);
    CHECK(quiet.commanded[i].z() == 0.05);
  }
}

TEST_CASE("campaigns are deterministic") {
  CampaignConfig c = grasp_only(3);
  c.trajectory_repetitions = 3;
  const CampaignReport a = run_campaign(c), b = run_campaign(c);
  REQUIRE(a.grasp.size() == b.grasp.size());
  for (std::size_t i = 0; i < a.grasp.size(); ++i) {
    CHECK(a.grasp[i].reached_psm1 == b.grasp[i].reached_psm1);
    CHECK(a.grasp[i].error_psm2 == b.grasp[i].error_psm2);
  }
  for (std::size_t i = 0; i < a.trajectory_rows.size(); ++i)
    for (std::size_t j = 0; j < a.trajectory_rows[i].size(); ++j)
      CHECK(a.trajectory_rows[i][j].std_dev_mm == b.trajectory_rows[i][j].std_dev_mm);
  CampaignConfig other = c;
  other.seed = 1;
  CHECK(run_campaign(other).grasp_stats.mean != a.grasp_stats.mean);

  CampaignConfig bad = c;
  bad.n_tools = 2;
  CHECK(code_of([&] { run_campaign(bad); }) == ErrorCode::InvalidArgument);
}

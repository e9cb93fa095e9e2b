#include "rigidcal/frame.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rigidcal/error.hpp"

namespace rigidcal {

namespace {

constexpr double kAxisTol = 1e-9;

ToolPair ordered(const ToolId& a, const ToolId& b) { return a < b ? ToolPair{a, b} : ToolPair{b, a}; }

}  // namespace

void MeasurementSet::validate() const {
  if (tool.name.empty()) throw CalibrationError(ErrorCode::InvalidArgument, "empty tool id");
  if (dot_points.size() < 3) {
    throw CalibrationError(ErrorCode::DegenerateInput,
                           "tool " + tool.name + " has " + std::to_string(dot_points.size()) +
                               " dots, at least 3 are needed for a plane");
  }
  for (const auto& p : dot_points) {
    if (!all_finite(p)) {
      throw CalibrationError(ErrorCode::InvalidArgument, "tool " + tool.name + " has a non-finite dot");
    }
  }
  if (!all_finite(above_point)) {
    throw CalibrationError(ErrorCode::InvalidArgument,
                           "tool " + tool.name + " has a non-finite above-point");
  }
}

const CommonFrame& CalibrationResult::frame(const ToolId& id) const {
  auto it = frames.find(id);
  if (it == frames.end()) throw CalibrationError(ErrorCode::UnknownTool, "no tool named " + id.name);
  return it->second;
}

CommonFrame build_common_frame(const MeasurementSet& m, const RansacParams& params) {
  m.validate();
  PlaneFit fit = ransac_plane(m.dot_points, params);

  PointList inlier_dots;
  inlier_dots.reserve(fit.inliers.size());
  for (auto i : fit.inliers) inlier_dots.push_back(m.dot_points[i]);
  const Point3 origin = centroid(inlier_dots);

  const double side = fit.plane.normal.dot(m.above_point - origin);
  if (std::abs(side) <= kAxisTol) {
    throw CalibrationError(ErrorCode::DegenerateInput,
                           "above-point of tool " + m.tool.name + " lies on the board plane");
  }
  if (side < 0.0) fit.plane = fit.plane.flipped();

  const Eigen::Vector3d z = fit.plane.normal;
  const Eigen::Vector3d v = m.dot_points.front() - origin;
  Eigen::Vector3d x = v - v.dot(z) * z;
  if (x.norm() <= kAxisTol) {
    throw CalibrationError(ErrorCode::AmbiguousAxis,
                           "first dot of tool " + m.tool.name + " projects onto the origin");
  }
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);

  Eigen::Matrix3d axes;
  axes << x, y, z;
  const RigidTransform common_to_tool(UnitQuaternion::from_matrix(axes), origin);

  return {m.tool, invert(common_to_tool), std::move(fit), origin};
}

CalibrationResult calibrate(const std::vector<MeasurementSet>& measurements,
                            const RansacParams& params) {
  if (measurements.size() < 2) {
    throw CalibrationError(ErrorCode::InvalidArgument, "calibration needs at least 2 tools");
  }
  std::set<ToolId> seen;
  for (const auto& m : measurements) {
    if (!seen.insert(m.tool).second) {
      throw CalibrationError(ErrorCode::InvalidArgument, "duplicate tool id " + m.tool.name);
    }
  }
  const std::size_t dots = measurements.front().dot_points.size();
  for (const auto& m : measurements) {
    if (m.dot_points.size() != dots) {
      throw CalibrationError(ErrorCode::OrderMismatch,
                             "tool " + m.tool.name + " has " + std::to_string(m.dot_points.size()) +
                                 " dots, tool " + measurements.front().tool.name + " has " +
                                 std::to_string(dots));
    }
  }

  CalibrationResult result;
  for (const auto& m : measurements) {
    CommonFrame frame;
    try {
      frame = build_common_frame(m, params);
    } catch (const CalibrationError& e) {
      throw CalibrationError(e.code(), "tool " + m.tool.name + ": " + e.detail());
    }
    double sum_sq = 0.0;
    for (const auto& p : m.dot_points) {
      const double d = frame.plane_fit.plane.signed_distance(p);
      sum_sq += d * d;
    }
    result.tools.push_back(m.tool);
    result.residuals[m.tool] = std::sqrt(sum_sq / static_cast<double>(m.dot_points.size()));
    result.frames.emplace(m.tool, std::move(frame));
  }

  std::map<ToolId, const MeasurementSet*> by_id;
  for (const auto& m : measurements) by_id[m.tool] = &m;
  for (auto a = by_id.begin(); a != by_id.end(); ++a) {
    for (auto b = std::next(a); b != by_id.end(); ++b) {
      const RigidTransform frame_based = tool_to_tool(result, a->first, b->first);
      const RigidTransform corr_based =
          kabsch_register(a->second->dot_points, b->second->dot_points);
      const TransformDelta delta = transform_delta(frame_based, corr_based);
      CrossCheck check;
      const MeasurementSet& ma = *a->second;
      check.translation_m = (apply(frame_based, ma.above_point) - apply(corr_based, ma.above_point)).norm();
      for (const auto& p : ma.dot_points) {
        check.translation_m =
            std::max(check.translation_m, (apply(frame_based, p) - apply(corr_based, p)).norm());
      }
      check.raw_translation_m = delta.translation_m;
      check.rotation_rad = delta.rotation_rad;
      result.cross_check[ordered(a->first, b->first)] = check;
    }
  }
  return result;
}

RigidTransform tool_to_tool(const CalibrationResult& r, const ToolId& a, const ToolId& b) {
  const RigidTransform& a_to_common = r.frame(a).tool_to_common;
  const RigidTransform& b_to_common = r.frame(b).tool_to_common;
  if (a == b) return RigidTransform::identity();
  return compose(invert(b_to_common), a_to_common);
}

}  // namespace rigidcal

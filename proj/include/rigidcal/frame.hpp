#pragma once

#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rigidcal/geom.hpp"
#include "rigidcal/registration.hpp"

namespace rigidcal {

struct ToolId {
  std::string name;

  friend auto operator<=>(const ToolId&, const ToolId&) = default;
};

// One tool's touches, in its own frame. dot_points order is the shared touch
// order and is the correspondence key across tools.
struct MeasurementSet {
  ToolId tool;
  PointList dot_points;
  Point3 above_point = Point3::Zero();

  // Throws InvalidArgument for an empty tool name or non-finite points,
  // DegenerateInput for fewer than 3 dots.
  void validate() const;
};

struct CommonFrame {
  ToolId tool;
  RigidTransform tool_to_common;
  PlaneFit plane_fit;  // normal oriented toward the above-point
  Point3 origin = Point3::Zero();  // tool frame
};

// Disagreement between the frame-based and the correspondence-based estimate
// of one tool-to-tool transform.
struct CrossCheck {
  double translation_m = 0.0;      // max displacement over tool a's board points
  double raw_translation_m = 0.0;  // difference of translation vectors (lever-arm sensitive)
  double rotation_rad = 0.0;
};

using ToolPair = std::pair<ToolId, ToolId>;  // stored with first < second

struct CalibrationResult {
  std::vector<ToolId> tools;  // input order
  std::map<ToolId, CommonFrame> frames;
  std::map<ToolId, double> residuals;  // rms distance of all dots to the fitted plane
  std::map<ToolPair, CrossCheck> cross_check;

  const CommonFrame& frame(const ToolId& id) const;  // throws UnknownTool
};

// Common frame: origin at the centroid of inlier dots, z along the plane
// normal toward the above-point, x toward the first dot projected on the plane.
CommonFrame build_common_frame(const MeasurementSet& m, const RansacParams& params);

CalibrationResult calibrate(const std::vector<MeasurementSet>& measurements,
                            const RansacParams& params);

// Maps tool-a coordinates into tool-b coordinates.
RigidTransform tool_to_tool(const CalibrationResult& r, const ToolId& a, const ToolId& b);

}  // namespace rigidcal

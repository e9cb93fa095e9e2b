#pragma once

#include <vector>

#include "rigidcal/geom.hpp"

namespace rigidcal {

// Calibration board: reference dots on a circle centered on the marker, plus
// one point held above the board to orient the plane normal.
class BoardModel {
 public:
  // Defaults: 5 cm radius, dots at 0/90/180/270 degrees, above-point 5 cm up.
  BoardModel();
  // Throws InvalidArgument unless radius > 0, above_height > 0, at least 3
  // pairwise-distinct angles, and every angle has its antipode in the set.
  BoardModel(double radius_m, std::vector<double> dot_angles_rad, double above_height_m);

  static BoardModel from_degrees(double radius_m, const std::vector<double>& dot_angles_deg,
                                 double above_height_m);

  double radius() const { return radius_; }
  const std::vector<double>& dot_angles() const { return dot_angles_; }
  double above_height() const { return above_height_; }
  std::size_t dot_count() const { return dot_angles_.size(); }

 private:
  double radius_;
  std::vector<double> dot_angles_;
  double above_height_;
};

struct MarkerPose {
  RigidTransform pose;  // marker frame -> camera frame
};

// Dots in dot_angles order, then the above-point (0, 0, above_height) last.
PointList board_points_marker_frame(const BoardModel& board);
PointList board_points_camera_frame(const MarkerPose& marker, const BoardModel& board);

}  // namespace rigidcal

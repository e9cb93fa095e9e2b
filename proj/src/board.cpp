#include "rigidcal/board.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rigidcal/error.hpp"

namespace rigidcal {

namespace {

constexpr double kAngleTol = 1e-9;

// Distance between two angles on the circle, in [0, pi].
double circular_gap(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

}  // namespace

BoardModel::BoardModel() : BoardModel(0.05, {0.0, 0.5 * std::numbers::pi, std::numbers::pi, 1.5 * std::numbers::pi}, 0.05) {}

BoardModel::BoardModel(double radius_m, std::vector<double> dot_angles_rad, double above_height_m)
    : radius_(radius_m), dot_angles_(std::move(dot_angles_rad)), above_height_(above_height_m) {
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "board radius must be positive");
  }
  if (!(above_height_ > 0.0) || !std::isfinite(above_height_)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "above_height must be positive");
  }
  if (dot_angles_.size() < 3) {
    throw CalibrationError(ErrorCode::InvalidArgument,
                           "board needs at least 3 dots, got " + std::to_string(dot_angles_.size()));
  }
  for (std::size_t i = 0; i < dot_angles_.size(); ++i) {
    if (!std::isfinite(dot_angles_[i])) {
      throw CalibrationError(ErrorCode::InvalidArgument, "dot angle must be finite");
    }
    bool has_antipode = false;
    for (std::size_t j = 0; j < dot_angles_.size(); ++j) {
      if (i == j) continue;
      const double gap = circular_gap(dot_angles_[i], dot_angles_[j]);
      if (gap < kAngleTol) {
        throw CalibrationError(ErrorCode::InvalidArgument, "dot angles must be pairwise distinct");
      }
      if (std::abs(gap - std::numbers::pi) < kAngleTol) has_antipode = true;
    }
    if (!has_antipode) {
      throw CalibrationError(ErrorCode::InvalidArgument,
                             "dot at index " + std::to_string(i) + " has no antipodal dot");
    }
  }
}

BoardModel BoardModel::from_degrees(double radius_m, const std::vector<double>& dot_angles_deg,
                                    double above_height_m) {
  std::vector<double> rad;
  rad.reserve(dot_angles_deg.size());
  for (double d : dot_angles_deg) rad.push_back(d * std::numbers::pi / 180.0);
  return {radius_m, std::move(rad), above_height_m};
}

PointList board_points_marker_frame(const BoardModel& board) {
  PointList pts;
  pts.reserve(board.dot_count() + 1);
  for (double theta : board.dot_angles()) {
    pts.emplace_back(board.radius() * std::cos(theta), board.radius() * std::sin(theta), 0.0);
  }
  pts.emplace_back(0.0, 0.0, board.above_height());
  return pts;
}

PointList board_points_camera_frame(const MarkerPose& marker, const BoardModel& board) {
  return apply_all(marker.pose, board_points_marker_frame(board));
}

}  // namespace rigidcal

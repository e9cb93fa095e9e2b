#include "rigidcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rigidcal/error.hpp"

namespace rigidcal {

ErrorStats error_stats(std::span<const double> errors_mm) {
  if (errors_mm.empty()) throw CalibrationError(ErrorCode::EmptyInput, "no errors to summarize");
  ErrorStats s;
  s.n = errors_mm.size();
  double sum = 0.0;
  s.max = errors_mm.front();
  for (double e : errors_mm) {
    sum += e;
    s.max = std::max(s.max, e);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double e : errors_mm) ss += (e - s.mean) * (e - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

double decompose_error(double total_mm, double intrinsic_mm) {
  if (!(intrinsic_mm >= 0.0) || !(total_mm >= intrinsic_mm)) {
    throw CalibrationError(ErrorCode::InvalidDecomposition,
                           "total " + std::to_string(total_mm) + " mm must be >= intrinsic " +
                               std::to_string(intrinsic_mm) + " mm >= 0");
  }
  // Factored form avoids squaring both terms before the cancellation.
  return std::sqrt((total_mm - intrinsic_mm) * (total_mm + intrinsic_mm));
}

DeviationRow trajectory_deviation(std::span<const Point3> a, std::span<const Point3> b) {
  if (a.size() != b.size()) {
    throw CalibrationError(ErrorCode::LengthMismatch,
                           "trajectories have " + std::to_string(a.size()) + " and " +
                               std::to_string(b.size()) + " waypoints");
  }
  if (a.size() < 2) {
    throw CalibrationError(ErrorCode::EmptyInput, "trajectory deviation needs at least 2 waypoints");
  }
  std::vector<double> d;
  d.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d.push_back((a[i] - b[i]).norm() / kMillimeter);

  const ErrorStats s = error_stats(d);
  DeviationRow row;
  row.std_dev_mm = s.std;
  for (double di : d) row.max_dev_mm = std::max(row.max_dev_mm, std::abs(di - s.mean));
  return row;
}

ErrorStats plane_consistency_check(std::span<const Point3> poses_a, std::span<const Point3> poses_b) {
  if (poses_a.size() != poses_b.size()) {
    throw CalibrationError(ErrorCode::LengthMismatch,
                           "pose lists have " + std::to_string(poses_a.size()) + " and " +
                               std::to_string(poses_b.size()) + " entries");
  }
  std::vector<double> d;
  d.reserve(poses_a.size());
  for (std::size_t i = 0; i < poses_a.size(); ++i) {
    d.push_back((poses_a[i] - poses_b[i]).norm() / kMillimeter);
  }
  return error_stats(d);
}

}  // namespace rigidcal

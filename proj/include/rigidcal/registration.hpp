#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rigidcal/geom.hpp"

namespace rigidcal {

// normal . p + offset = 0 for points on the plane; |normal| = 1.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Point3& p) const { return normal.dot(p) + offset; }
  Plane flipped() const { return {-normal, -offset}; }
};

struct RansacParams {
  double inlier_threshold = 1.0 * kMillimeter;
  int max_iterations = 500;
  int min_inliers = 3;
  std::uint64_t seed = 0;

  // Throws InvalidArgument if threshold <= 0, iterations < 1 or min_inliers < 3.
  void validate() const;
};

struct PlaneFit {
  Plane plane;
  std::vector<std::size_t> inliers;  // ascending indices into the input
  double rms_residual = 0.0;         // over inliers, meters
};

Point3 centroid(std::span<const Point3> points);

// Total least squares (orthogonal distance) via the covariance eigen-decomposition.
// The normal is oriented toward +z (then +x, +y when the z component vanishes).
Plane fit_plane_least_squares(std::span<const Point3> points);

// Seeded RANSAC over 3-point minimal samples. The winning model maximizes the
// inlier count, then minimizes inlier rms, then keeps the earliest iteration.
// The returned plane is the least-squares refit over the consensus set.
PlaneFit ransac_plane(std::span<const Point3> points, const RansacParams& params);

// Least-squares proper rigid transform T minimizing sum |T(src_i) - dst_i|^2.
RigidTransform kabsch_register(std::span<const Point3> src, std::span<const Point3> dst);

}  // namespace rigidcal

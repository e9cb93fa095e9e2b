#include "rigidcal/registration.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rigidcal/error.hpp"

namespace rigidcal {

namespace {

constexpr double kCollinearRatio = 1e-12;

Eigen::Matrix3d scatter(std::span<const Point3> points, const Point3& mean) {
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Point3 d = p - mean;
    s += d * d.transpose();
  }
  return s;
}

Eigen::Vector3d orient_default(Eigen::Vector3d n) {
  for (int i : {2, 0, 1}) {
    if (n[i] > 0.0) return n;
    if (n[i] < 0.0) return -n;
  }
  return n;
}

// Smallest height of the triangle (a, b, c); zero when collinear.
double min_triangle_height(const Point3& a, const Point3& b, const Point3& c) {
  const double twice_area = (b - a).cross(c - a).norm();
  const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  return longest > 0.0 ? twice_area / longest : 0.0;
}

// Largest distance of any point from the principal line of the set.
double max_distance_from_principal_line(std::span<const Point3> points) {
  const Point3 c = centroid(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter(points, c));
  const Eigen::Vector3d dir = eig.eigenvectors().col(2);
  double worst = 0.0;
  for (const auto& p : points) {
    const Point3 d = p - c;
    worst = std::max(worst, (d - d.dot(dir) * dir).norm());
  }
  return worst;
}

struct Consensus {
  std::vector<std::size_t> inliers;
  double rms = 0.0;
};

Consensus evaluate(std::span<const Point3> points, const Plane& plane, double threshold) {
  Consensus c;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = std::abs(plane.signed_distance(points[i]));
    if (d <= threshold) {
      c.inliers.push_back(i);
      sum_sq += d * d;
    }
  }
  if (!c.inliers.empty()) c.rms = std::sqrt(sum_sq / static_cast<double>(c.inliers.size()));
  return c;
}

PointList gather(std::span<const Point3> points, const std::vector<std::size_t>& idx) {
  PointList out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(points[i]);
  return out;
}

}  // namespace

void RansacParams::validate() const {
  if (!(inlier_threshold > 0.0) || !std::isfinite(inlier_threshold)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "inlier_threshold must be positive");
  }
  if (max_iterations < 1) {
    throw CalibrationError(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  }
  if (min_inliers < 3) {
    throw CalibrationError(ErrorCode::InvalidArgument, "min_inliers must be >= 3");
  }
}

Point3 centroid(std::span<const Point3> points) {
  if (points.empty()) throw CalibrationError(ErrorCode::EmptyInput, "centroid of no points");
  Point3 sum = Point3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

Plane fit_plane_least_squares(std::span<const Point3> points) {
  if (points.size() < 3) {
    throw CalibrationError(ErrorCode::DegenerateInput,
                           "plane fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  const Point3 c = centroid(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter(points, c));
  const Eigen::Vector3d& ev = eig.eigenvalues();  // ascending
  if (!(ev[2] > 0.0) || ev[1] < kCollinearRatio * ev[2]) {
    throw CalibrationError(ErrorCode::DegenerateInput, "points are collinear or coincident");
  }
  const Eigen::Vector3d n = orient_default(eig.eigenvectors().col(0).normalized());
  return {n, -n.dot(c)};
}

PlaneFit ransac_plane(std::span<const Point3> points, const RansacParams& params) {
  params.validate();
  if (points.size() < 3) {
    throw CalibrationError(ErrorCode::DegenerateInput,
                           "RANSAC needs at least 3 points, got " + std::to_string(points.size()));
  }
  if (points.size() < static_cast<std::size_t>(params.min_inliers)) {
    throw CalibrationError(ErrorCode::InsufficientInliers,
                           std::to_string(points.size()) + " points < min_inliers " +
                               std::to_string(params.min_inliers));
  }
  const double thr = params.inlier_threshold;
  if (max_distance_from_principal_line(points) <= thr) {
    throw CalibrationError(ErrorCode::DegenerateInput,
                           "all points lie within the inlier threshold of a line");
  }

  std::mt19937_64 rng(params.seed);
  const std::size_t n = points.size();
  bool have_model = false;
  Consensus best;

  for (int it = 0; it < params.max_iterations; ++it) {
    std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, n - 3)(rng);
    // Map onto distinct indices without replacement.
    if (j >= i) ++j;
    const std::size_t lo = std::min(i, j), hi = std::max(i, j);
    if (k >= lo) ++k;
    if (k >= hi) ++k;

    const Point3 &a = points[i], &b = points[j], &c = points[k];
    if (min_triangle_height(a, b, c) <= thr) continue;
    const Eigen::Vector3d normal = (b - a).cross(c - a).normalized();
    const Plane model{normal, -normal.dot(a)};

    Consensus cand = evaluate(points, model, thr);
    const bool better = !have_model || cand.inliers.size() > best.inliers.size() ||
                        (cand.inliers.size() == best.inliers.size() && cand.rms < best.rms);
    if (better) {
      best = std::move(cand);
      have_model = true;
    }
  }

  if (!have_model) {
    throw CalibrationError(ErrorCode::DegenerateInput, "every RANSAC sample was degenerate");
  }
  if (best.inliers.size() < static_cast<std::size_t>(params.min_inliers)) {
    throw CalibrationError(ErrorCode::InsufficientInliers,
                           "best model has " + std::to_string(best.inliers.size()) +
                               " inliers < min_inliers " + std::to_string(params.min_inliers));
  }

  // Refit over the consensus set; repeat while the refit changes membership.
  std::vector<std::size_t> support = best.inliers;
  Plane plane = fit_plane_least_squares(gather(points, support));
  for (int pass = 0; pass < 8; ++pass) {
    Consensus again = evaluate(points, plane, thr);
    if (again.inliers == support ||
        again.inliers.size() < static_cast<std::size_t>(params.min_inliers)) {
      break;
    }
    support = std::move(again.inliers);
    plane = fit_plane_least_squares(gather(points, support));
  }

  PlaneFit fit;
  fit.plane = plane;
  double sum_sq = 0.0;
  for (auto idx : support) {
    const double d = std::abs(plane.signed_distance(points[idx]));
    // A refit can push a support point past the threshold; report only true inliers.
    if (d <= thr) {
      fit.inliers.push_back(idx);
      sum_sq += d * d;
    }
  }
  if (fit.inliers.size() < static_cast<std::size_t>(params.min_inliers)) {
    throw CalibrationError(ErrorCode::InsufficientInliers, "refit lost consensus");
  }
  fit.rms_residual = std::sqrt(sum_sq / static_cast<double>(fit.inliers.size()));
  return fit;
}

RigidTransform kabsch_register(std::span<const Point3> src, std::span<const Point3> dst) {
  if (src.size() != dst.size()) {
    throw CalibrationError(ErrorCode::LengthMismatch,
                           "src has " + std::to_string(src.size()) + " points, dst has " +
                               std::to_string(dst.size()));
  }
  if (src.size() < 3) {
    throw CalibrationError(ErrorCode::DegenerateInput, "registration needs at least 3 pairs");
  }
  const Point3 cs = centroid(src);
  const Point3 cd = centroid(dst);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter(src, cs), Eigen::EigenvaluesOnly);
  const Eigen::Vector3d& ev = eig.eigenvalues();
  if (!(ev[2] > 0.0) || ev[1] < kCollinearRatio * ev[2]) {
    throw CalibrationError(ErrorCode::DegenerateInput, "source points are collinear");
  }

  Eigen::Matrix3d cross_cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cross_cov += (src[i] - cs) * (dst[i] - cd).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross_cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixV() * fix * svd.matrixU().transpose();

  const UnitQuaternion q = UnitQuaternion::from_matrix(r);
  return {q, cd - q.rotate(cs)};
}

}  // namespace rigidcal

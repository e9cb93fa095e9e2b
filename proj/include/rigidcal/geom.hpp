#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace rigidcal {

// All lengths are meters. Conversion from millimeters happens at file boundaries.
using Point3 = Eigen::Vector3d;
using PointList = std::vector<Point3>;

inline constexpr double kMillimeter = 1e-3;

// Unit quaternion kept in canonical sign (w >= 0; if w == 0 the first nonzero
// of x, y, z is positive), so q and -q compare equal.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;
  // Normalizes and canonicalizes. Throws InvalidArgument for zero or non-finite input.
  UnitQuaternion(double w, double x, double y, double z);
  explicit UnitQuaternion(const Eigen::Quaterniond& q);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Eigen::Vector3d& axis, double angle_rad);
  // Rotation matrix must be proper orthonormal (not checked beyond finiteness).
  static UnitQuaternion from_matrix(const Eigen::Matrix3d& rotation);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  const Eigen::Quaterniond& eigen() const { return q_; }
  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }

  UnitQuaternion operator*(const UnitQuaternion& other) const;
  UnitQuaternion conjugate() const;
  Point3 rotate(const Point3& p) const { return q_ * p; }

  friend bool operator==(const UnitQuaternion& a, const UnitQuaternion& b) {
    return a.q_.coeffs() == b.q_.coeffs();
  }

 private:
  Eigen::Quaterniond q_{1.0, 0.0, 0.0, 0.0};
};

// Geodesic angle in [0, pi] of the rotation taking a to b.
double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b);

// Proper rigid motion p -> R p + t. No scale by construction.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const UnitQuaternion& rotation, const Point3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Point3& t) { return {UnitQuaternion{}, t}; }
  static RigidTransform from_rotation(const UnitQuaternion& q) { return {q, Point3::Zero()}; }

  const UnitQuaternion& rotation() const { return rotation_; }
  const Point3& translation() const { return translation_; }
  Eigen::Isometry3d isometry() const;

  friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
    return a.rotation_ == b.rotation_ && a.translation_ == b.translation_;
  }

 private:
  UnitQuaternion rotation_;
  Point3 translation_ = Point3::Zero();
};

// compose(a, b) applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Point3 apply(const RigidTransform& t, const Point3& p);
PointList apply_all(const RigidTransform& t, std::span<const Point3> points);

// Translation and rotation discrepancy between two transforms.
struct TransformDelta {
  double translation_m = 0.0;
  double rotation_rad = 0.0;
};
TransformDelta transform_delta(const RigidTransform& a, const RigidTransform& b);

bool all_finite(const Point3& p);

}  // namespace rigidcal

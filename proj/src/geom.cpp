#include "rigidcal/geom.hpp"

#include <cmath>
#include <limits>

#include "rigidcal/error.hpp"

namespace rigidcal {

namespace {

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  const double norm = q.norm();
  if (!std::isfinite(norm) || norm == 0.0) {
    throw CalibrationError(ErrorCode::InvalidArgument, "quaternion must be finite and nonzero");
  }
  // Already-unit input is kept as is, so serialized quaternions reload bit-exactly.
  if (std::abs(norm - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) q.coeffs() /= norm;
  // Sign rule: w first, then x, y, z.
  for (double c : {q.w(), q.x(), q.y(), q.z()}) {
    if (c > 0.0) break;
    if (c < 0.0) {
      q.coeffs() = -q.coeffs();
      break;
    }
  }
  return q;
}

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z)
    : q_(canonical(Eigen::Quaterniond(w, x, y, z))) {}

UnitQuaternion::UnitQuaternion(const Eigen::Quaterniond& q) : q_(canonical(q)) {}

UnitQuaternion UnitQuaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  const double n = axis.norm();
  if (!std::isfinite(n) || n == 0.0 || !std::isfinite(angle_rad)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "axis must be finite and nonzero");
  }
  return UnitQuaternion(Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis / n)));
}

UnitQuaternion UnitQuaternion::from_matrix(const Eigen::Matrix3d& rotation) {
  if (!rotation.allFinite()) {
    throw CalibrationError(ErrorCode::InvalidArgument, "rotation matrix must be finite");
  }
  return UnitQuaternion(Eigen::Quaterniond(rotation));
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& other) const {
  return UnitQuaternion(q_ * other.q_);
}

UnitQuaternion UnitQuaternion::conjugate() const { return UnitQuaternion(q_.conjugate()); }

double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Eigen::Quaterniond d = a.eigen().conjugate() * b.eigen();
  // atan2 form stays accurate near zero, unlike acos(|w|).
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

RigidTransform::RigidTransform(const UnitQuaternion& rotation, const Point3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!all_finite(translation)) {
    throw CalibrationError(ErrorCode::InvalidArgument, "translation must be finite");
  }
}

Eigen::Isometry3d RigidTransform::isometry() const {
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = rotation_.matrix();
  iso.translation() = translation_;
  return iso;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation().rotate(b.translation()) + a.translation()};
}

RigidTransform invert(const RigidTransform& t) {
  const UnitQuaternion inv = t.rotation().conjugate();
  return {inv, -inv.rotate(t.translation())};
}

Point3 apply(const RigidTransform& t, const Point3& p) {
  return t.rotation().rotate(p) + t.translation();
}

PointList apply_all(const RigidTransform& t, std::span<const Point3> points) {
  PointList out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(apply(t, p));
  return out;
}

TransformDelta transform_delta(const RigidTransform& a, const RigidTransform& b) {
  return {(a.translation() - b.translation()).norm(), angular_distance(a.rotation(), b.rotation())};
}

bool all_finite(const Point3& p) { return p.allFinite(); }

}  // namespace rigidcal

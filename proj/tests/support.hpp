#pragma once

// Seeded generators shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "rigidcal/geom.hpp"

namespace rigidcal::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Point3 random_point(std::mt19937_64& rng, double half_extent = 0.2) {
  return {uniform(rng, -half_extent, half_extent), uniform(rng, -half_extent, half_extent),
          uniform(rng, -half_extent, half_extent)};
}

inline Point3 gaussian_point(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng), y = n(rng), z = n(rng);
  return {x, y, z};
}

// Uniform rotation from a normalized 4D Gaussian (independent of the library's sampler).
inline UnitQuaternion random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  return UnitQuaternion(w, x, y, z);
}

inline RigidTransform random_transform(std::mt19937_64& rng, double half_extent = 0.5) {
  const UnitQuaternion q = random_quaternion(rng);
  return RigidTransform(q, random_point(rng, half_extent));
}

inline UnitQuaternion rot_z_deg(double deg) {
  return UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), deg * std::numbers::pi / 180.0);
}

// p -> R p + t evaluated with a plain matrix, as an oracle for apply().
inline Point3 apply_by_matrix(const RigidTransform& t, const Point3& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = t.rotation().matrix();
  m.topRightCorner<3, 1>() = t.translation();
  return (m * p.homogeneous()).head<3>();
}

// Translation and geodesic rotation distance, evaluated from matrices.
inline double rotation_gap(const RigidTransform& a, const RigidTransform& b) {
  const Eigen::Matrix3d r = a.rotation().matrix().transpose() * b.rotation().matrix();
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near 0; fall back to the skew part.
  const Eigen::Vector3d s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * s.norm(), c);
}

inline double translation_gap(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation() - b.translation()).norm();
}

inline bool transforms_close(const RigidTransform& a, const RigidTransform& b, double tol) {
  return translation_gap(a, b) <= tol && rotation_gap(a, b) <= tol;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("rigidcal_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace rigidcal::testing

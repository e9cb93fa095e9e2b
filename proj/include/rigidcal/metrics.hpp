#pragma once

#include <span>

#include "rigidcal/geom.hpp"

namespace rigidcal {

// Millimeters. std is the sample (n - 1) standard deviation; 0 when n == 1.
struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

struct DeviationRow {
  double radius_mm = 0.0;
  double std_dev_mm = 0.0;
  double max_dev_mm = 0.0;
};

ErrorStats error_stats(std::span<const double> errors_mm);

// Quadrature removal of an independent error source: sqrt(total^2 - intrinsic^2).
double decompose_error(double total_mm, double intrinsic_mm);

// d_i = |a_i - b_i|; std is the sample std of d, max_dev is max |d_i - mean(d)|.
// Inputs in meters, outputs in millimeters; radius_mm is left at 0.
DeviationRow trajectory_deviation(std::span<const Point3> a, std::span<const Point3> b);

// Distances between matched poses of two arms (meters in, millimeters out).
ErrorStats plane_consistency_check(std::span<const Point3> poses_a, std::span<const Point3> poses_b);

}  // namespace rigidcal

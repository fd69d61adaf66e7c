#pragma once

#include <span>
#include <vector>

#include "sgdinfer/linalg.hpp"

namespace sgdinfer {

/// Closed interval [lower, upper].
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Per-coordinate confidence intervals at a common level.
struct CiTable {
  double level = 0.95;
  std::vector<Interval> intervals;

  std::size_t size() const { return intervals.size(); }
  const Interval& operator[](std::size_t i) const { return intervals[i]; }
};

/// Linear-interpolation quantile: sort, h = (len-1)q, interpolate between
/// floor(h) and ceil(h). Throws on empty input or q outside [0, 1].
double empirical_quantile(std::span<const double> samples, double q);

/// Same rule on already sorted data (no copy).
double sorted_quantile(std::span<const double> sorted, double q);

/// Unbiased (denominator R-1) covariance of R equal-length vectors.
Matrix sample_covariance(std::span<const Vector> samples);

/// Equal-tailed quantile intervals per coordinate.
CiTable quantile_intervals(std::span<const Vector> samples, double level);

/// Standard normal quantile (Wichura's AS241, relative accuracy ~1e-16).
double normal_quantile(double p);

}  // namespace sgdinfer

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gwb/error.hpp"
#include "gwb/matrix.hpp"

namespace gwb {

inline constexpr double kWeightSumSlack = 1e-6;
inline constexpr double kTriangleTol = 1e-9;

namespace detail {

/// Returns weights normalized to sum 1. Accepts sums within
/// [1 - kWeightSumSlack, 1 + kWeightSumSlack]; anything else is an error.
/// Sums already within kWeightKeepTol of 1 are kept bit-for-bit: the division
/// is order-sensitive in the last ulp, and skipping it keeps relabeled copies
/// of a space bitwise identical to the original.
inline constexpr double kWeightKeepTol = 1e-12;

inline std::vector<double> checked_weights(std::vector<double> w, std::size_t n) {
  if (w.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  if (w.size() != n)
    throw validation_error(errc::dimension_mismatch,
                           "weights size " + std::to_string(w.size()) +
                               " does not match n=" + std::to_string(n));
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x)) throw validation_error(errc::non_finite, "weight");
    if (x <= 0.0)
      throw validation_error(errc::weight_sum, "weights must be positive");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > kWeightSumSlack)
    throw validation_error(errc::weight_sum,
                           "weights sum to " + std::to_string(sum));
  if (std::fabs(sum - 1.0) > kWeightKeepTol)
    for (double& x : w) x /= sum;
  return w;
}

inline void check_distance_matrix(const Matrix& d) {
  if (d.rows() != d.cols())
    throw validation_error(errc::not_square, "distance matrix");
  const std::size_t n = d.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (d(i, i) != 0.0)
      throw validation_error(errc::nonzero_diagonal,
                             "entry (" + std::to_string(i) + "," +
                                 std::to_string(i) + ")");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d(i, j);
      if (!std::isfinite(v))
        throw validation_error(errc::non_finite,
                               "entry (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")");
      if (v < 0.0)
        throw validation_error(errc::negative_entry,
                               "entry (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")");
      if (j > i && std::fabs(v - d(j, i)) != 0.0)
        throw validation_error(errc::asymmetric,
                               "entries (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")");
    }
  }
}

}  // namespace detail

/// Finite metric-measure space: pairwise distances plus a probability vector.
/// Weights may be omitted (uniform) or off from 1 by at most 1e-6, in which
/// case they are renormalized.
struct MmSpace {
  Matrix distances;
  std::vector<double> weights;

  MmSpace() = default;
  MmSpace(Matrix d, std::vector<double> w = {})
      : distances(std::move(d)),
        weights(detail::checked_weights(std::move(w), distances.rows())) {
    detail::check_distance_matrix(distances);
  }

  std::size_t size() const { return distances.rows(); }
};

/// MmSpace with a feature vector per point (rows of `features`).
struct StructuredSpace {
  MmSpace base;
  Matrix features;

  StructuredSpace() = default;
  StructuredSpace(MmSpace s, Matrix f) : base(std::move(s)), features(std::move(f)) {
    if (features.rows() != base.size())
      throw validation_error(errc::feature_rows,
                             "feature rows " + std::to_string(features.rows()) +
                                 " for n=" + std::to_string(base.size()));
    for (std::size_t i = 0; i < features.rows(); ++i)
      for (std::size_t j = 0; j < features.cols(); ++j)
        if (!std::isfinite(features(i, j)))
          throw validation_error(errc::non_finite, "feature entry");
  }

  std::size_t size() const { return base.size(); }
};

/// Weighted points in R^d (rows of `points`).
struct PointCloud {
  Matrix points;
  std::vector<double> weights;

  PointCloud() = default;
  PointCloud(Matrix p, std::vector<double> w = {})
      : points(std::move(p)),
        weights(detail::checked_weights(std::move(w), points.rows())) {
    for (std::size_t i = 0; i < points.rows(); ++i)
      for (std::size_t j = 0; j < points.cols(); ++j)
        if (!std::isfinite(points(i, j)))
          throw validation_error(errc::non_finite, "point coordinate");
  }

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
};

/// Re-checks invariants; with strict=true also verifies the triangle
/// inequality (O(n^3)) to tolerance kTriangleTol.
inline void validate(const MmSpace& space, bool strict = false) {
  detail::check_distance_matrix(space.distances);
  if (space.weights.size() != space.size())
    throw validation_error(errc::dimension_mismatch, "weights size");
  if (!strict) return;
  const std::size_t n = space.size();
  const Matrix& d = space.distances;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (d(i, j) > d(i, k) + d(k, j) + kTriangleTol)
          throw validation_error(errc::triangle_violation,
                                 "(" + std::to_string(i) + "," +
                                     std::to_string(j) + "," +
                                     std::to_string(k) + ")");
}

inline void validate(const StructuredSpace& space, bool strict = false) {
  validate(space.base, strict);
  if (space.features.rows() != space.size())
    throw validation_error(errc::feature_rows, "feature rows");
}

/// Euclidean distance matrix of a point cloud, as an MmSpace with the same
/// weights.
inline MmSpace mm_from_point_cloud(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  Matrix d(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v =
          std::sqrt(squared_distance(cloud.points.row(i), cloud.points.row(j)));
      d(i, j) = v;
      d(j, i) = v;
    }
  return MmSpace(std::move(d), cloud.weights);
}

}  // namespace gwb

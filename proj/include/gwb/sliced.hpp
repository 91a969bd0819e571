#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gwb/error.hpp"
#include "gwb/matrix.hpp"
#include "gwb/ot.hpp"
#include "gwb/parallel.hpp"
#include "gwb/rng.hpp"

namespace gwb {

/// Direction-sampling rule. Only plain Gaussian normalization is implemented;
/// the enum leaves room for low-discrepancy rules.
enum class DirectionRule { gaussian };

/// L unit directions in R^D, reproducible bit-for-bit from (seed, L, D).
/// Generator: mt19937_64 with Marsaglia polar normals ("mt19937_64/polar").
struct ProjectionSet {
  Matrix directions;  // L x D, unit rows
  std::uint64_t seed = 0;
  std::size_t dim = 0;

  std::size_t count() const { return directions.rows(); }
};

inline ProjectionSet sample_directions(std::uint64_t seed, std::size_t L,
                                       std::size_t D,
                                       DirectionRule rule = DirectionRule::gaussian) {
  if (D == 0) throw std::domain_error("direction dimension must be >= 1");
  if (L == 0) throw std::domain_error("need at least one direction");
  (void)rule;
  ProjectionSet out{Matrix(L, D), seed, D};
  Rng rng(seed);
  for (std::size_t l = 0; l < L; ++l) {
    auto row = out.directions.row(l);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t k = 0; k < D; ++k) {
        row[k] = rng.normal();
        norm2 += row[k] * row[k];
      }
    } while (norm2 < 1e-24);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < D; ++k) row[k] *= inv;
  }
  return out;
}

/// Monte Carlo SW_2^2 estimate plus the per-projection spread needed for
/// slack bounds: mc_std is the standard error of the mean.
struct Sw2Stats {
  double value = 0.0;
  double mc_std = 0.0;
  std::vector<double> per_projection;
};

/// (1/L) sum_l W_2^2 of the projections of two weighted point sets onto the
/// shared directions. Projection loop parallelizes; the average is a pairwise
/// tree sum, so the result is independent of the thread count.
inline Sw2Stats sw2_squared_stats(const Matrix& a_points,
                                  std::span<const double> a_weights,
                                  const Matrix& b_points,
                                  std::span<const double> b_weights,
                                  const ProjectionSet& proj, int threads = 1) {
  if (a_points.cols() != proj.dim || b_points.cols() != proj.dim)
    throw validation_error(errc::dimension_mismatch,
                           "points vs projection dimension");
  if (a_points.rows() != a_weights.size() || b_points.rows() != b_weights.size())
    throw validation_error(errc::dimension_mismatch, "points vs weights");
  const std::size_t L = proj.count();
  Sw2Stats stats;
  stats.per_projection.resize(L);
  parallel_for(L, threads, [&](std::size_t l) {
    const auto dir = proj.directions.row(l);
    std::vector<double> pa(a_points.rows()), pb(b_points.rows());
    for (std::size_t i = 0; i < a_points.rows(); ++i)
      pa[i] = dot(a_points.row(i), dir);
    for (std::size_t j = 0; j < b_points.rows(); ++j)
      pb[j] = dot(b_points.row(j), dir);
    stats.per_projection[l] =
        wasserstein_1d_pp(pa, a_weights, pb, b_weights, 2.0);
  });
  stats.value = tree_sum(stats.per_projection) / static_cast<double>(L);
  if (L > 1) {
    std::vector<double> sq(L);
    for (std::size_t l = 0; l < L; ++l) {
      const double d = stats.per_projection[l] - stats.value;
      sq[l] = d * d;
    }
    const double var = tree_sum(sq) / static_cast<double>(L - 1);
    stats.mc_std = std::sqrt(var / static_cast<double>(L));
  }
  return stats;
}

inline double sw2_squared(const Matrix& a_points, std::span<const double> a_weights,
                          const Matrix& b_points, std::span<const double> b_weights,
                          const ProjectionSet& proj, int threads = 1) {
  return sw2_squared_stats(a_points, a_weights, b_points, b_weights, proj, threads)
      .value;
}

/// c_{k,l}^2 from sphere surface areas A(S^n) = 2 pi^{(n+1)/2} / Gamma((n+1)/2),
/// evaluated in log space. The ratio telescopes to l/(k+l), so the value lies
/// in (0,1) and decays to 0 as k grows.
inline double dimension_constant_squared(std::size_t k, std::size_t l) {
  if (l <= 1) throw std::domain_error("dimension constant needs l > 1");
  if (k < 1) throw std::domain_error("dimension constant needs k >= 1");
  auto log_area = [](std::size_t n) {
    const double half = 0.5 * static_cast<double>(n + 1);
    return std::log(2.0) + half * std::log(M_PI) - std::lgamma(half);
  };
  const double log_c2 = (log_area(k + l + 1) - log_area(l + 1)) +
                        (log_area(l - 1) - log_area(k + l - 1));
  return std::exp(log_c2);
}

inline double dimension_constant(std::size_t k, std::size_t l) {
  return std::sqrt(dimension_constant_squared(k, l));
}

/// Prepends k zero coordinates to every point, embedding R^l into R^{k+l}
/// with the support on the last l coordinates.
inline Matrix pad_front_zeros(const Matrix& points, std::size_t k) {
  Matrix out(points.rows(), points.cols() + k, 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i)
    for (std::size_t j = 0; j < points.cols(); ++j) out(i, k + j) = points(i, j);
  return out;
}

}  // namespace gwb

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gwb/error.hpp"
#include "gwb/matrix.hpp"
#include "gwb/spaces.hpp"

namespace gwb {

/// Quadrature rule on (0,1): strictly increasing knots with positive weights
/// summing to 1 (renormalized under the same slack as point weights).
struct QuadratureRule {
  std::vector<double> knots;
  std::vector<double> weights;

  QuadratureRule() = default;
  QuadratureRule(std::vector<double> k, std::vector<double> w)
      : knots(std::move(k)),
        weights(detail::checked_weights(std::move(w), knots.size())) {
    if (knots.empty()) throw std::domain_error("quadrature rule needs r >= 1");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!(knots[i] > 0.0 && knots[i] < 1.0))
        throw std::domain_error("quadrature knot outside (0,1)");
      if (i && !(knots[i] > knots[i - 1]))
        throw std::domain_error("quadrature knots must be strictly increasing");
    }
  }

  std::size_t size() const { return knots.size(); }
};

/// Midpoint rule with r knots: s_k = (k - 1/2)/r, weight 1/r each.
inline QuadratureRule midpoint_rule(std::size_t r) {
  if (r == 0) throw std::domain_error("midpoint rule needs r >= 1");
  std::vector<double> knots(r), weights(r, 1.0 / static_cast<double>(r));
  for (std::size_t k = 0; k < r; ++k)
    knots[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(r);
  return QuadratureRule(std::move(knots), std::move(weights));
}

/// Midpoint rule on the intervals cut by the merged cumulative breakpoints of
/// two weight vectors. Quantile functions of both distributions are constant
/// on each interval, so integrating step functions against this rule is
/// exact. At most |a| + |b| - 1 intervals.
inline QuadratureRule nonequispaced_midpoint_rule(std::span<const double> a,
                                                  std::span<const double> b) {
  std::vector<double> cuts;
  cuts.reserve(a.size() + b.size());
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) cuts.push_back(c += a[i]);
  c = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) cuts.push_back(c += b[i]);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> knots, weights;
  knots.reserve(cuts.size() + 1);
  weights.reserve(cuts.size() + 1);
  double lo = 0.0;
  for (std::size_t i = 0; i <= cuts.size(); ++i) {
    const double hi = i < cuts.size() ? cuts[i] : 1.0;
    if (hi - lo > 1e-12) {
      knots.push_back(0.5 * (lo + hi));
      weights.push_back(hi - lo);
      lo = hi;
    }
  }
  return QuadratureRule(std::move(knots), std::move(weights));
}

/// One row distribution with its values sorted; `order` maps sorted position
/// to the original index, `cumw` holds cumulative sorted weights.
struct SortedRow {
  std::vector<double> values;
  std::vector<double> cumw;
  std::vector<std::size_t> order;
};

inline SortedRow sorted_row(std::span<const double> values,
                            std::span<const double> weights) {
  SortedRow row;
  const std::size_t n = values.size();
  row.order.resize(n);
  std::iota(row.order.begin(), row.order.end(), std::size_t{0});
  std::stable_sort(row.order.begin(), row.order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  row.values.resize(n);
  row.cumw.resize(n);
  double c = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    row.values[k] = values[row.order[k]];
    c += weights[row.order[k]];
    row.cumw[k] = c;
  }
  return row;
}

namespace detail {

/// First sorted index whose cumulative weight strictly exceeds s. Falls back
/// to the last atom when rounding leaves the total just under s.
inline std::size_t quantile_index(const SortedRow& row, double s,
                                  std::size_t start = 0) {
  std::size_t k = start;
  while (k + 1 < row.cumw.size() && row.cumw[k] <= s) ++k;
  return k;
}

}  // namespace detail

/// Quantile of the discrete distribution sum_i weights[i] * delta(values[i]):
/// the smallest value whose cumulative mass strictly exceeds s.
inline double weighted_quantile(std::span<const double> values,
                                std::span<const double> weights, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("quantile level outside (0,1)");
  if (values.size() != weights.size())
    throw validation_error(errc::dimension_mismatch, "values vs weights");
  if (values.empty()) throw std::domain_error("empty distribution");
  const SortedRow row = sorted_row(values, weights);
  return row.values[detail::quantile_index(row, s)];
}

/// Evaluates the quantile function at every knot of an increasing knot
/// sequence in one pass (O(n + r) after the sort). Also reports the chosen
/// sorted index per knot when `indices` is given.
inline void row_quantiles(const SortedRow& row, std::span<const double> knots,
                          std::span<double> out,
                          std::vector<std::size_t>* indices = nullptr) {
  std::size_t k = 0;
  if (indices) indices->resize(knots.size());
  for (std::size_t q = 0; q < knots.size(); ++q) {
    k = detail::quantile_index(row, knots[q], k);
    out[q] = row.values[k];
    if (indices) (*indices)[q] = k;
  }
}

/// Per-point quantile signatures: row i is (sqrt(w_k) * q_i(s_k))_k where q_i
/// is the quantile function of the distance distribution seen from point i
/// (self-distance 0 carries that point's own mass).
struct QuantileEmbedding {
  Matrix points;
  std::vector<double> weights;

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
};

inline QuantileEmbedding embed(const MmSpace& space, const QuadratureRule& rule) {
  const std::size_t n = space.size();
  const std::size_t r = rule.size();
  std::vector<double> scale(r);
  for (std::size_t k = 0; k < r; ++k) scale[k] = std::sqrt(rule.weights[k]);
  QuantileEmbedding out{Matrix(n, r), space.weights};
  for (std::size_t i = 0; i < n; ++i) {
    const SortedRow row = sorted_row(space.distances.row(i), space.weights);
    row_quantiles(row, rule.knots, out.points.row(i));
    auto dst = out.points.row(i);
    for (std::size_t k = 0; k < r; ++k) dst[k] *= scale[k];
  }
  return out;
}

/// Quantile block scaled by sqrt(1-alpha) next to the feature block scaled by
/// sqrt(alpha); squared distances then split as (1-alpha)*structure +
/// alpha*feature.
struct FusedEmbedding {
  Matrix points;
  std::vector<double> weights;
  double alpha = 0.0;

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
};

inline FusedEmbedding fuse(const QuantileEmbedding& embedding, const Matrix& features,
                           double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("alpha outside [0,1]");
  if (features.rows() != embedding.size())
    throw validation_error(errc::feature_rows,
                           std::to_string(features.rows()) + " feature rows for n=" +
                               std::to_string(embedding.size()));
  const std::size_t n = embedding.size();
  const std::size_t r = embedding.dim();
  const std::size_t d = features.cols();
  const double sq = std::sqrt(1.0 - alpha);
  const double sz = std::sqrt(alpha);
  FusedEmbedding out{Matrix(n, r + d), embedding.weights, alpha};
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.points.row(i);
    auto src = embedding.points.row(i);
    for (std::size_t k = 0; k < r; ++k) dst[k] = sq * src[k];
    auto f = features.row(i);
    for (std::size_t k = 0; k < d; ++k) dst[r + k] = sz * f[k];
  }
  return out;
}

}  // namespace gwb

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gwb/bounds.hpp"
#include "gwb/matrix.hpp"
#include "gwb/ot.hpp"
#include "gwb/quantile.hpp"
#include "gwb/rng.hpp"
#include "gwb/sliced.hpp"
#include "gwb/spaces.hpp"

namespace gwb {

enum class BaryDistance { tlb, stlb };

struct BarycenterConfig {
  std::size_t n_points = 50;
  std::size_t dim = 2;
  std::size_t steps = 1000;
  double step_size = 0.1;
  std::size_t restarts = 3;
  BaryDistance distance = BaryDistance::tlb;
  std::size_t r = 100;               // quadrature size (stlb)
  std::size_t num_projections = 100;  // L (stlb)
  std::uint64_t seed = 0;
  std::optional<Matrix> warm_start;  // overrides the random-normal init
  int threads = 1;
};

struct BarycenterResult {
  Matrix points;
  std::vector<double> loss_trace;  // best restart: loss before each step + final
  std::size_t best_restart = 0;
  std::vector<double> final_losses;  // per restart (inf if aborted)
  std::vector<char> aborted;
};

namespace detail {

/// p=2 cumulative-mass merge that reports every matched interval
/// (sorted positions ia, ib and interval mass) while accumulating W_2^2.
/// Mirrors wasserstein_1d_pp_sorted; the couplings coincide.
template <typename Cb>
double w2sq_coupled(const SortedRow& a, const SortedRow& b, Cb&& cb) {
  const std::size_t n = a.values.size();
  const std::size_t m = b.values.size();
  std::size_t ia = 0, ib = 0;
  double prev = 0.0, total = 0.0;
  while (ia < n && ib < m) {
    const double ca = a.cumw[ia];
    const double cb_ = b.cumw[ib];
    const double nxt = std::min(ca, cb_);
    const double mass = nxt - prev;
    if (mass > 0.0) {
      const double diff = a.values[ia] - b.values[ib];
      total += mass * (diff * diff);  // association matches pow_abs(diff, 2)
      cb(ia, ib, mass, diff);
    }
    if (ca == nxt) ++ia;
    if (cb_ == nxt) ++ib;
    prev = nxt;
  }
  return total;
}

struct TargetCache {
  std::vector<SortedRow> rows;          // tlb path
  Matrix embedding;                     // stlb path (n x r, scaled)
  std::vector<double> weights;
};

}  // namespace detail

/// Loss = sum_k dist^2(metric of `points`, target_k) at p=2, with the
/// envelope gradient: outer plans, 1D couplings, sort permutations, and
/// quantile selections are held fixed, and the Euclidean distance matrix is
/// differentiated through the point coordinates. The ||x_a - x_b|| factor in
/// the chain rule is guarded by max(.., 1e-12) at coincident points.
inline std::pair<double, Matrix> loss_and_gradient(
    const Matrix& points, const std::vector<MmSpace>& targets,
    const BarycenterConfig& cfg, const ProjectionSet* projections = nullptr) {
  if (targets.empty()) throw std::domain_error("need at least one target");
  for (const MmSpace& t : targets)
    if (!detail::all_equal(t.weights))
      throw validation_error(errc::bad_argument, "targets must be uniform-weight");
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  const std::vector<double> wx(n, 1.0 / static_cast<double>(n));

  Matrix dmat(n, n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = std::sqrt(squared_distance(points.row(a), points.row(b)));
      dmat(a, b) = d;
      dmat(b, a) = d;
    }

  std::vector<SortedRow> rx(n);
  for (std::size_t i = 0; i < n; ++i) rx[i] = sorted_row(dmat.row(i), wx);

  // dLoss/dD per target (own slot, so targets can run in parallel), summed
  // in fixed order and chained to points at the end.
  std::vector<Matrix> grad_d_per(targets.size());
  std::vector<double> loss_per(targets.size(), 0.0);

  if (cfg.distance == BaryDistance::tlb) {
    parallel_for(targets.size(), cfg.threads, [&](std::size_t t) {
      const MmSpace& target = targets[t];
      Matrix grad_d(n, n, 0.0);
      const std::vector<SortedRow> ry = detail::sorted_distance_rows(target);
      Matrix ld(n, target.size());
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < target.size(); ++j)
          ld(i, j) = detail::wasserstein_1d_pp_sorted(rx[i], ry[j], 2.0);
      const TransportPlan plan = solve_ot(ld, wx, target.weights);
      loss_per[t] = plan.cost;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < target.size(); ++j) {
          const double pij = plan.plan(i, j);
          if (pij == 0.0) continue;
          detail::w2sq_coupled(
              rx[i], ry[j],
              [&](std::size_t ia, std::size_t ib, double mass, double diff) {
                (void)ib;
                grad_d(i, rx[i].order[ia]) += pij * 2.0 * mass * diff;
              });
        }
      grad_d_per[t] = std::move(grad_d);
    });
  } else {
    const QuadratureRule rule = midpoint_rule(cfg.r);
    ProjectionSet local;
    if (!projections) {
      local = sample_directions(cfg.seed, cfg.num_projections, cfg.r);
      projections = &local;
    }
    if (projections->dim != cfg.r)
      throw validation_error(errc::dimension_mismatch, "projection dim vs r");
    const std::size_t L = projections->count();
    const double scale = std::sqrt(rule.weights[0]);  // midpoint: all equal

    // Embed the candidate cloud, remembering which atom each knot selected.
    Matrix ex(n, cfg.r);
    std::vector<std::vector<std::size_t>> pick(n);
    for (std::size_t i = 0; i < n; ++i) {
      row_quantiles(rx[i], rule.knots, ex.row(i), &pick[i]);
      auto row = ex.row(i);
      for (std::size_t k = 0; k < cfg.r; ++k) row[k] *= scale;
    }
    const double inv_l = 1.0 / static_cast<double>(L);
    parallel_for(targets.size(), cfg.threads, [&](std::size_t t) {
      const Matrix ey = embed(targets[t], rule).points;
      Matrix grad_e(n, cfg.r, 0.0);
      std::vector<double> pa(n), pb(ey.rows()), per_proj(L);
      for (std::size_t l = 0; l < L; ++l) {
        const auto dir = projections->directions.row(l);
        for (std::size_t i = 0; i < n; ++i) pa[i] = dot(ex.row(i), dir);
        for (std::size_t j = 0; j < ey.rows(); ++j) pb[j] = dot(ey.row(j), dir);
        const SortedRow sa = sorted_row(pa, wx);
        const SortedRow sb = sorted_row(pb, targets[t].weights);
        per_proj[l] = detail::w2sq_coupled(
            sa, sb, [&](std::size_t ia, std::size_t ib, double mass, double diff) {
              (void)ib;
              const double coef = inv_l * 2.0 * mass * diff;
              auto gr = grad_e.row(sa.order[ia]);
              for (std::size_t k = 0; k < cfg.r; ++k) gr[k] += coef * dir[k];
            });
      }
      loss_per[t] = tree_sum(per_proj) * inv_l;
      Matrix grad_d(n, n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < cfg.r; ++k)
          grad_d(i, rx[i].order[pick[i][k]]) += grad_e(i, k) * scale;
      grad_d_per[t] = std::move(grad_d);
    });
  }

  Matrix grad_d(n, n, 0.0);
  for (const Matrix& g : grad_d_per)
    for (std::size_t c = 0; c < n * n; ++c) grad_d.data()[c] += g.data()[c];
  const double loss = tree_sum(loss_per);

  Matrix grad(n, dim, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    auto ga = grad.row(a);
    const auto xa = points.row(a);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == a) continue;
      const double coef =
          (grad_d(a, i) + grad_d(i, a)) / std::max(dmat(a, i), 1e-12);
      if (coef == 0.0) continue;
      const auto xi = points.row(i);
      for (std::size_t c = 0; c < dim; ++c) ga[c] += coef * (xa[c] - xi[c]);
    }
  }
  return {loss, std::move(grad)};
}

/// Fixed-step gradient descent with random-normal restarts; the lowest final
/// loss wins. A restart whose loss exceeds 1e12 (or stops being finite) is
/// aborted and recorded.
inline BarycenterResult solve(const std::vector<MmSpace>& targets,
                              const BarycenterConfig& cfg) {
  if (targets.empty()) throw std::domain_error("need at least one target");
  if (cfg.steps < 1 || !(cfg.step_size > 0.0))
    throw std::domain_error("need steps >= 1 and step_size > 0");
  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  BarycenterResult result;
  result.final_losses.assign(restarts, std::numeric_limits<double>::infinity());
  result.aborted.assign(restarts, 0);
  result.best_restart = restarts;

  std::vector<Matrix> final_points(restarts);
  std::vector<std::vector<double>> traces(restarts);
  parallel_for(restarts, cfg.threads, [&](std::size_t t) {
    Matrix points(cfg.n_points, cfg.dim);
    if (cfg.warm_start) {
      if (cfg.warm_start->rows() != cfg.n_points ||
          cfg.warm_start->cols() != cfg.dim)
        throw validation_error(errc::dimension_mismatch, "warm start shape");
      points = *cfg.warm_start;
    } else {
      Rng rng(derive_seed(cfg.seed, 100 + t));
      for (std::size_t i = 0; i < cfg.n_points; ++i)
        for (std::size_t c = 0; c < cfg.dim; ++c) points(i, c) = rng.normal();
    }
    ProjectionSet proj;
    const ProjectionSet* proj_ptr = nullptr;
    if (cfg.distance == BaryDistance::stlb) {
      // Directions frozen for the whole descent run.
      proj = sample_directions(derive_seed(cfg.seed, 500 + t),
                               cfg.num_projections, cfg.r);
      proj_ptr = &proj;
    }

    std::vector<double>& trace = traces[t];
    trace.reserve(cfg.steps + 1);
    bool ok = true;
    for (std::size_t s = 0; s < cfg.steps; ++s) {
      auto [loss, grad] = loss_and_gradient(points, targets, cfg, proj_ptr);
      trace.push_back(loss);
      if (!std::isfinite(loss) || loss > 1e12) {
        ok = false;
        break;
      }
      for (std::size_t i = 0; i < cfg.n_points; ++i)
        for (std::size_t c = 0; c < cfg.dim; ++c)
          points(i, c) -= cfg.step_size * grad(i, c);
    }
    if (ok) {
      auto [loss, grad] = loss_and_gradient(points, targets, cfg, proj_ptr);
      (void)grad;
      trace.push_back(loss);
      if (!std::isfinite(loss) || loss > 1e12) ok = false;
      if (ok) result.final_losses[t] = loss;
    }
    result.aborted[t] = ok ? 0 : 1;
    final_points[t] = std::move(points);
  });
  for (std::size_t t = 0; t < restarts; ++t)
    if (result.best_restart == restarts ||
        result.final_losses[t] < result.final_losses[result.best_restart])
      result.best_restart = t;
  if (!std::isfinite(result.final_losses[result.best_restart]))
    throw solver_error("every restart diverged");
  result.points = std::move(final_points[result.best_restart]);
  result.loss_trace = std::move(traces[result.best_restart]);
  return result;
}

}  // namespace gwb

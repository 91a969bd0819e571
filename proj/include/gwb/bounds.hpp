#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwb/matrix.hpp"
#include "gwb/ot.hpp"
#include "gwb/parallel.hpp"
#include "gwb/quantile.hpp"
#include "gwb/sliced.hpp"
#include "gwb/spaces.hpp"

namespace gwb {

enum class OuterSolver { exact, sinkhorn };

/// Shared knobs for every bound. `rule` may be left empty, in which case the
/// sliced/embedding paths pick the midpoint rule with r=n for uniform
/// equal-size inputs and the merged-breakpoint rule otherwise.
struct BoundConfig {
  double p = 2.0;
  double alpha = 0.0;
  QuadratureRule rule;
  std::size_t num_projections = 100;
  std::uint64_t seed = 0;
  OuterSolver outer_solver = OuterSolver::exact;
  SinkhornOptions sinkhorn_options;
  int threads = 1;
};

struct SolveMetadata {
  std::string solver;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double wall_time_seconds = 0.0;
  bool converged = true;
  double mc_std = 0.0;  // standard error of sliced estimates, 0 for exact paths
};

struct DistanceResult {
  double value = 0.0;
  double value_power_p = 0.0;
  std::optional<TransportPlan> plan;
  SolveMetadata metadata;
};

namespace detail {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void check_order(double p) {
  if (!(p >= 1.0)) throw std::domain_error("order p must be >= 1");
}

inline double root_p(double pp, double p) {
  pp = std::max(pp, 0.0);
  if (p == 2.0) return std::sqrt(pp);
  if (p == 1.0) return pp;
  return std::pow(pp, 1.0 / p);
}

inline DistanceResult result_from_power(double pp, double p, std::string solver) {
  DistanceResult r;
  r.value_power_p = pp;
  r.value = root_p(pp, p);
  r.metadata.solver = std::move(solver);
  return r;
}

inline bool uniform_weights(std::span<const double> w) { return all_equal(w); }

/// Sort cache of every distance row (the self-distance 0 included with the
/// point's own mass).
inline std::vector<SortedRow> sorted_distance_rows(const MmSpace& s) {
  std::vector<SortedRow> rows(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    rows[i] = sorted_row(s.distances.row(i), s.weights);
  return rows;
}

}  // namespace detail

/// Rule used by the embedding-based bounds when cfg.rule is empty: midpoint
/// with r=n when both sides are uniform with equal size (the exactness
/// regime), else the merged-breakpoint rule, which integrates both quantile
/// step functions exactly.
inline QuadratureRule default_rule(const MmSpace& x, const MmSpace& y) {
  if (x.size() == y.size() && detail::uniform_weights(x.weights) &&
      detail::uniform_weights(y.weights))
    return midpoint_rule(x.size());
  return nonequispaced_midpoint_rule(x.weights, y.weights);
}

/// First lower bound: 1D W_p between the two eccentricity distributions
/// s(x_i) = (sum_j w_j g(x_i,x_j)^p)^{1/p}.
inline DistanceResult flb(const MmSpace& x, const MmSpace& y, double p) {
  detail::check_order(p);
  detail::StopWatch watch;
  auto eccentricities = [p](const MmSpace& s) {
    std::vector<double> ecc(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      double acc = 0.0;
      const auto row = s.distances.row(i);
      for (std::size_t j = 0; j < s.size(); ++j)
        acc += s.weights[j] * detail::pow_abs(row[j], p);
      ecc[i] = detail::root_p(acc, p);
    }
    return ecc;
  };
  const std::vector<double> ex = eccentricities(x);
  const std::vector<double> ey = eccentricities(y);
  const double pp = wasserstein_1d_pp(ex, x.weights, ey, y.weights, p);
  DistanceResult r = detail::result_from_power(pp, p, "flb/1d");
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

/// Second lower bound: 1D W_p between the global distance distributions
/// (n^2 atoms with masses w_i w_j).
inline DistanceResult slb(const MmSpace& x, const MmSpace& y, double p) {
  detail::check_order(p);
  detail::StopWatch watch;
  auto distance_distribution = [](const MmSpace& s, std::vector<double>& values,
                                  std::vector<double>& masses) {
    const std::size_t n = s.size();
    values.resize(n * n);
    masses.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        values[i * n + j] = s.distances(i, j);
        masses[i * n + j] = s.weights[i] * s.weights[j];
      }
  };
  std::vector<double> xv, xm, yv, ym;
  distance_distribution(x, xv, xm);
  distance_distribution(y, yv, ym);
  const double pp = wasserstein_1d_pp(xv, xm, yv, ym, p);
  DistanceResult r = detail::result_from_power(pp, p, "slb/1d");
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

/// Entry (i,j) = W_p^p between the distance distribution seen from x_i and
/// the one seen from y_j.
inline Matrix local_distance_matrix(const MmSpace& x, const MmSpace& y, double p,
                                    int threads = 1) {
  detail::check_order(p);
  const std::vector<SortedRow> rx = detail::sorted_distance_rows(x);
  const std::vector<SortedRow> ry = detail::sorted_distance_rows(y);
  Matrix ld(x.size(), y.size());
  const bool aligned_grids =
      x.size() == y.size() && detail::uniform_weights(x.weights) &&
      detail::uniform_weights(y.weights) && x.weights[0] == y.weights[0];
  if (aligned_grids) {
    // Both sides share one cumulative grid, so the merge pairs k-th order
    // statistics; this single pass reproduces it term for term.
    const std::vector<double>& cum = rx[0].cumw;
    parallel_for(x.size(), threads, [&](std::size_t i) {
      const double* av = rx[i].values.data();
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double* bv = ry[j].values.data();
        double prev = 0.0, total = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
          total += (cum[k] - prev) * detail::pow_abs(av[k] - bv[k], p);
          prev = cum[k];
        }
        ld(i, j) = total;
      }
    });
    return ld;
  }
  parallel_for(x.size(), threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < y.size(); ++j)
      ld(i, j) = detail::wasserstein_1d_pp_sorted(rx[i], ry[j], p);
  });
  return ld;
}

namespace detail {

/// Outer OT over a precomputed cost matrix, exact or entropic per cfg.
inline DistanceResult outer_ot(const Matrix& cost, const MmSpace& x,
                               const MmSpace& y, const BoundConfig& cfg,
                               const char* name) {
  DistanceResult r;
  if (cfg.outer_solver == OuterSolver::exact) {
    TransportPlan plan = solve_ot(cost, x.weights, y.weights);
    r = result_from_power(plan.cost, cfg.p, std::string(name) + "/exact");
    r.metadata.iterations = plan.iterations;
    r.plan = std::move(plan);
  } else {
    TransportPlan plan = sinkhorn(cost, x.weights, y.weights, cfg.sinkhorn_options);
    r = result_from_power(plan.cost, cfg.p, std::string(name) + "/sinkhorn");
    r.metadata.iterations = plan.iterations;
    r.metadata.converged = plan.converged;
    r.plan = std::move(plan);
  }
  return r;
}

}  // namespace detail

/// Third lower bound: optimal transport with the local-distance matrix as
/// ground cost.
inline DistanceResult tlb(const MmSpace& x, const MmSpace& y,
                          const BoundConfig& cfg) {
  detail::check_order(cfg.p);
  detail::StopWatch watch;
  const Matrix ld = local_distance_matrix(x, y, cfg.p, cfg.threads);
  DistanceResult r = detail::outer_ot(ld, x, y, cfg, "tlb");
  r.metadata.seed = cfg.seed;
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

namespace detail {

inline void check_features(const StructuredSpace& x, const StructuredSpace& y) {
  if (x.features.cols() != y.features.cols())
    throw validation_error(errc::dimension_mismatch,
                           "feature dimensions " +
                               std::to_string(x.features.cols()) + " vs " +
                               std::to_string(y.features.cols()));
}

inline Matrix feature_cost(const StructuredSpace& x, const StructuredSpace& y,
                           double p) {
  Matrix f(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double sq = squared_distance(x.features.row(i), y.features.row(j));
      f(i, j) = p == 2.0 ? sq : std::pow(std::sqrt(sq), p);
    }
  return f;
}

}  // namespace detail

/// Fused third lower bound: outer OT over
/// (1-alpha) * LD_p^p + alpha * ||z_i - z'_j||^p.
inline DistanceResult ftlb(const StructuredSpace& x, const StructuredSpace& y,
                           const BoundConfig& cfg) {
  detail::check_order(cfg.p);
  detail::check_features(x, y);
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw std::domain_error("alpha outside [0,1]");
  detail::StopWatch watch;
  const Matrix ld = local_distance_matrix(x.base, y.base, cfg.p, cfg.threads);
  const Matrix fc = detail::feature_cost(x, y, cfg.p);
  Matrix cost(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      cost(i, j) = (1.0 - cfg.alpha) * ld(i, j) + cfg.alpha * fc(i, j);
  DistanceResult r = detail::outer_ot(cost, x.base, y.base, cfg, "ftlb");
  r.metadata.seed = cfg.seed;
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

/// The p=2 identity route: exact OT between the fused quantile embeddings
/// under squared-Euclidean cost. Agrees with ftlb for uniform equal-size
/// inputs with the midpoint r=n rule; kept as an independent code path.
inline DistanceResult ftlb_embedding(const StructuredSpace& x,
                                     const StructuredSpace& y,
                                     const BoundConfig& cfg) {
  if (cfg.p != 2.0)
    throw std::domain_error("embedding route requires p = 2");
  detail::check_features(x, y);
  detail::StopWatch watch;
  const QuadratureRule rule =
      cfg.rule.size() ? cfg.rule : default_rule(x.base, y.base);
  const FusedEmbedding ex = fuse(embed(x.base, rule), x.features, cfg.alpha);
  const FusedEmbedding ey = fuse(embed(y.base, rule), y.features, cfg.alpha);
  const Matrix cost = cost_matrix_sqeuclidean(ex.points, ey.points);
  DistanceResult r = detail::outer_ot(cost, x.base, y.base, cfg, "ftlb-embed");
  r.metadata.seed = cfg.seed;
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

namespace detail {

inline void check_sliced_order(double p) {
  if (p != 2.0) throw std::domain_error("sliced bounds require p = 2");
}

inline DistanceResult sliced_result(const Sw2Stats& stats, const char* name,
                                    std::uint64_t seed) {
  DistanceResult r = result_from_power(stats.value, 2.0, name);
  r.metadata.seed = seed;
  r.metadata.mc_std = stats.mc_std;
  return r;
}

}  // namespace detail

/// Sliced third lower bound: SW_2^2 between the quantile embeddings, with the
/// directions drawn from the given set (shared across a pairwise job).
inline DistanceResult stlb(const MmSpace& x, const MmSpace& y,
                           const BoundConfig& cfg, const ProjectionSet& proj) {
  detail::check_sliced_order(cfg.p);
  detail::StopWatch watch;
  const QuadratureRule rule = cfg.rule.size() ? cfg.rule : default_rule(x, y);
  if (proj.dim != rule.size())
    throw validation_error(errc::dimension_mismatch,
                           "projection dim vs quadrature size");
  const QuantileEmbedding ex = embed(x, rule);
  const QuantileEmbedding ey = embed(y, rule);
  const Sw2Stats stats = sw2_squared_stats(ex.points, ex.weights, ey.points,
                                           ey.weights, proj, cfg.threads);
  DistanceResult r = detail::sliced_result(stats, "stlb/mt19937_64-polar", proj.seed);
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

inline DistanceResult stlb(const MmSpace& x, const MmSpace& y,
                           const BoundConfig& cfg) {
  detail::check_sliced_order(cfg.p);
  const QuadratureRule rule = cfg.rule.size() ? cfg.rule : default_rule(x, y);
  BoundConfig with_rule = cfg;
  with_rule.rule = rule;
  return stlb(x, y, with_rule,
              sample_directions(cfg.seed, cfg.num_projections, rule.size()));
}

/// Sliced fused bound: SW_2^2 between the alpha-fused embeddings in
/// dimension r+d.
inline DistanceResult sftlb(const StructuredSpace& x, const StructuredSpace& y,
                            const BoundConfig& cfg, const ProjectionSet& proj) {
  detail::check_sliced_order(cfg.p);
  detail::check_features(x, y);
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw std::domain_error("alpha outside [0,1]");
  detail::StopWatch watch;
  const QuadratureRule rule =
      cfg.rule.size() ? cfg.rule : default_rule(x.base, y.base);
  if (proj.dim != rule.size() + x.features.cols())
    throw validation_error(errc::dimension_mismatch,
                           "projection dim vs fused dimension");
  const FusedEmbedding ex = fuse(embed(x.base, rule), x.features, cfg.alpha);
  const FusedEmbedding ey = fuse(embed(y.base, rule), y.features, cfg.alpha);
  const Sw2Stats stats = sw2_squared_stats(ex.points, ex.weights, ey.points,
                                           ey.weights, proj, cfg.threads);
  DistanceResult r =
      detail::sliced_result(stats, "sftlb/mt19937_64-polar", proj.seed);
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

inline DistanceResult sftlb(const StructuredSpace& x, const StructuredSpace& y,
                            const BoundConfig& cfg) {
  detail::check_sliced_order(cfg.p);
  detail::check_features(x, y);
  const QuadratureRule rule =
      cfg.rule.size() ? cfg.rule : default_rule(x.base, y.base);
  BoundConfig with_rule = cfg;
  with_rule.rule = rule;
  return sftlb(x, y, with_rule,
               sample_directions(cfg.seed, cfg.num_projections,
                                 rule.size() + x.features.cols()));
}

/// Exact permutation search over the p-distortion objective
/// (1/n^2) sum_{i,k} |g_ik - h_{s(i)s(k)}|^p. Restricted to uniform
/// equal-size inputs with n <= 8, where it serves as an upper/ordering
/// oracle for the bound hierarchy.
inline DistanceResult gw_bruteforce(const MmSpace& x, const MmSpace& y, double p) {
  detail::check_order(p);
  const std::size_t n = x.size();
  if (n != y.size() || n > 8)
    throw validation_error(errc::bad_argument,
                           "brute force needs n = m <= 8, got " +
                               std::to_string(n) + " vs " +
                               std::to_string(y.size()));
  if (!detail::uniform_weights(x.weights) || !detail::uniform_weights(y.weights))
    throw validation_error(errc::bad_argument, "brute force needs uniform weights");
  detail::StopWatch watch;
  std::vector<std::size_t> perm(n), best_perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  best_perm = perm;
  double best = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  do {
    double acc = 0.0;
    for (std::size_t i = 0; i < n && acc < best; ++i)
      for (std::size_t k = 0; k < n; ++k)
        acc += detail::pow_abs(x.distances(i, k) - y.distances(perm[i], perm[k]), p);
    if (acc < best) {
      best = acc;
      best_perm = perm;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double pp = best / static_cast<double>(n * n);
  DistanceResult r = detail::result_from_power(pp, p, "gw/bruteforce");
  TransportPlan plan;
  plan.plan = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    plan.plan(i, best_perm[i]) = 1.0 / static_cast<double>(n);
  plan.cost = pp;
  r.plan = std::move(plan);
  r.metadata.iterations = count;
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

namespace detail {

/// Contraction of the p-distortion tensor with a plan:
/// L(pi)_ij = sum_{k,l} |g_ik - h_jl|^p pi_kl. For p=2 this expands to
/// (G.^2 mu)_i + (nu' H.^2)_j - 2 (G pi H)_ij.
inline Matrix distortion_contraction(const Matrix& g, const Matrix& h,
                                     const Matrix& plan, double p) {
  const std::size_t n = g.rows();
  const std::size_t m = h.rows();
  Matrix out(n, m, 0.0);
  if (p == 2.0) {
    std::vector<double> mu(n, 0.0), nu(m, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < m; ++l) {
        mu[k] += plan(k, l);
        nu[l] += plan(k, l);
      }
    std::vector<double> row_term(n, 0.0), col_term(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        row_term[i] += g(i, k) * g(i, k) * mu[k];
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < m; ++l)
        col_term[j] += h(j, l) * h(j, l) * nu[l];
    // cross = G * plan * H, computed as (G * plan) then * H.
    Matrix gp(n, m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double gik = g(i, k);
        if (gik == 0.0) continue;
        for (std::size_t l = 0; l < m; ++l) gp(i, l) += gik * plan(k, l);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < m; ++l) {
        const double gpil = gp(i, l);
        if (gpil == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) out(i, j) += gpil * h(l, j);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        out(i, j) = row_term[i] + col_term[j] - 2.0 * out(i, j);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < m; ++l)
            acc += pow_abs(g(i, k) - h(j, l), p) * plan(k, l);
        out(i, j) = acc;
      }
  }
  return out;
}

}  // namespace detail

/// Entropic block-coordinate descent for the fused objective
/// (1-alpha) <L(pi), pi> + alpha <F, pi>: alternately linearize the quadratic
/// distortion at the current plan and solve the fused linear cost with
/// Sinkhorn. Returns the entropy-free objective of the final feasible plan
/// (an upper bound on the true infimum).
inline DistanceResult fgw_entropic(const StructuredSpace& x,
                                   const StructuredSpace& y,
                                   const BoundConfig& cfg,
                                   bool identity_init = false) {
  detail::check_order(cfg.p);
  detail::check_features(x, y);
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw std::domain_error("alpha outside [0,1]");
  detail::StopWatch watch;
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const Matrix fc = detail::feature_cost(x, y, cfg.p);

  Matrix plan(n, m);
  if (identity_init) {
    if (n != m)
      throw validation_error(errc::bad_argument, "identity init needs n = m");
    for (std::size_t i = 0; i < n; ++i) plan(i, i) = x.base.weights[i];
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        plan(i, j) = x.base.weights[i] * y.base.weights[j];
  }

  const std::size_t max_outer = 200;
  const double outer_tol = 1e-7;
  bool converged = false;
  bool inner_converged = true;
  std::size_t outer = 0;
  for (; outer < max_outer; ++outer) {
    const Matrix lin = detail::distortion_contraction(x.base.distances,
                                                      y.base.distances, plan, cfg.p);
    Matrix cost(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        cost(i, j) = (1.0 - cfg.alpha) * lin(i, j) + cfg.alpha * fc(i, j);
    TransportPlan step =
        sinkhorn(cost, x.base.weights, y.base.weights, cfg.sinkhorn_options);
    inner_converged = step.converged;
    double delta2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double d = step.plan(i, j) - plan(i, j);
        delta2 += d * d;
      }
    plan = std::move(step.plan);
    if (std::sqrt(delta2) < outer_tol) {
      converged = true;
      ++outer;
      break;
    }
  }

  const Matrix lin = detail::distortion_contraction(x.base.distances,
                                                    y.base.distances, plan, cfg.p);
  double quad = 0.0, feat = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      quad += lin(i, j) * plan(i, j);
      feat += fc(i, j) * plan(i, j);
    }
  const double pp = (1.0 - cfg.alpha) * quad + cfg.alpha * feat;
  DistanceResult r = detail::result_from_power(pp, cfg.p, "fgw/entropic-bcd");
  TransportPlan final_plan;
  final_plan.plan = std::move(plan);
  final_plan.cost = pp;
  final_plan.converged = converged && inner_converged;
  final_plan.iterations = outer;
  r.plan = std::move(final_plan);
  r.metadata.iterations = outer;
  r.metadata.converged = converged && inner_converged;
  r.metadata.seed = cfg.seed;
  r.metadata.wall_time_seconds = watch.seconds();
  return r;
}

}  // namespace gwb

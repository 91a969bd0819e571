#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwb/error.hpp"
#include "gwb/matrix.hpp"
#include "gwb/quantile.hpp"

namespace gwb {

/// Coupling between two discrete measures plus solver diagnostics. Exact
/// solvers report converged=true and the number of pivots/augmentations as
/// `iterations`.
struct TransportPlan {
  Matrix plan;
  double cost = 0.0;
  std::size_t iterations = 0;
  double marginal_error = 0.0;
  bool converged = true;
};

namespace detail {

inline double pow_abs(double d, double p) {
  d = std::fabs(d);
  if (p == 2.0) return d * d;
  if (p == 1.0) return d;
  return std::pow(d, p);
}

/// W_p^p between two sorted discrete distributions via the cumulative-mass
/// merge. Quantile functions are constant between cumulative breakpoints, so
/// the integral over (0,1) is a sum over at most |a|+|b|-1 intervals. The
/// control flow treats the two sides symmetrically (ties advance both), which
/// makes the result bitwise identical under argument swap.
inline double wasserstein_1d_pp_sorted(const SortedRow& a, const SortedRow& b,
                                       double p) {
  const std::size_t n = a.values.size();
  const std::size_t m = b.values.size();
  std::size_t ia = 0, ib = 0;
  double prev = 0.0;
  double total = 0.0;
  while (ia < n && ib < m) {
    const double ca = a.cumw[ia];
    const double cb = b.cumw[ib];
    const double nxt = std::min(ca, cb);
    const double mass = nxt - prev;
    if (mass > 0.0) total += mass * pow_abs(a.values[ia] - b.values[ib], p);
    if (ca == nxt) ++ia;
    if (cb == nxt) ++ib;
    prev = nxt;
  }
  return total;
}

inline SortedRow normalized_sorted_row(std::span<const double> values,
                                       std::span<const double> weights) {
  if (values.size() != weights.size())
    throw validation_error(errc::dimension_mismatch, "values vs weights");
  if (values.empty()) throw std::domain_error("empty distribution");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw validation_error(errc::weight_sum, "1d weights must be >= 0");
  }
  // Normalize the cumulative masses after sorting: the arithmetic then
  // depends only on the (value, weight) multiset, not on input order, so two
  // permutations of the same atoms produce bitwise-equal rows.
  SortedRow row = sorted_row(values, weights);
  const double total = row.cumw.back();
  if (!(total > 0.0)) throw validation_error(errc::weight_sum, "1d weights sum to 0");
  for (double& c : row.cumw) c /= total;
  return row;
}

}  // namespace detail

/// p-th power of the 1D p-Wasserstein distance between two weighted atom
/// sets. Weights are normalized to probability vectors; zero-mass atoms are
/// allowed and carry no cost.
inline double wasserstein_1d_pp(std::span<const double> a_values,
                                std::span<const double> a_weights,
                                std::span<const double> b_values,
                                std::span<const double> b_weights, double p) {
  if (!(p >= 1.0)) throw std::domain_error("order p must be >= 1");
  const SortedRow a = detail::normalized_sorted_row(a_values, a_weights);
  const SortedRow b = detail::normalized_sorted_row(b_values, b_weights);
  return detail::wasserstein_1d_pp_sorted(a, b, p);
}

inline double wasserstein_1d(std::span<const double> a_values,
                             std::span<const double> a_weights,
                             std::span<const double> b_values,
                             std::span<const double> b_weights, double p) {
  const double pp = wasserstein_1d_pp(a_values, a_weights, b_values, b_weights, p);
  if (p == 2.0) return std::sqrt(pp);
  if (p == 1.0) return pp;
  return std::pow(pp, 1.0 / p);
}

/// Minimum-cost perfect assignment on a square cost matrix (shortest
/// augmenting paths with dual potentials, O(n^3)). Returns the column
/// assigned to each row.
inline std::vector<std::size_t> solve_assignment(const Matrix& cost,
                                                 double* total = nullptr) {
  if (cost.rows() != cost.cols())
    throw validation_error(errc::not_square, "assignment cost");
  const std::size_t n = cost.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] = row currently matched to column j, 0 = free.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      const auto crow = cost.row(i0 - 1);
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = crow[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  double sum = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    row_to_col[p[j] - 1] = j - 1;
    sum += cost(p[j] - 1, j - 1);
  }
  if (total) *total = sum;
  return row_to_col;
}

namespace detail {

/// Transportation simplex state: a spanning-tree basis over row nodes
/// [0,n) and column nodes [n, n+m).
struct SimplexBasis {
  std::size_t n, m;
  std::vector<double> flow;     // n*m, meaningful on basic cells
  std::vector<char> basic;      // n*m
  std::vector<std::vector<std::size_t>> adj;  // node -> incident basic cells

  SimplexBasis(std::size_t n_, std::size_t m_)
      : n(n_), m(m_), flow(n_ * m_, 0.0), basic(n_ * m_, 0), adj(n_ + m_) {}

  std::size_t cell(std::size_t i, std::size_t j) const { return i * m + j; }
  std::size_t row_of(std::size_t c) const { return c / m; }
  std::size_t col_of(std::size_t c) const { return c % m; }

  void add(std::size_t c) {
    basic[c] = 1;
    adj[row_of(c)].push_back(c);
    adj[n + col_of(c)].push_back(c);
  }
  void remove(std::size_t c) {
    basic[c] = 0;
    auto drop = [&](std::vector<std::size_t>& v) {
      v.erase(std::find(v.begin(), v.end(), c));
    };
    drop(adj[row_of(c)]);
    drop(adj[n + col_of(c)]);
  }
};

}  // namespace detail

/// Exact optimal transport between two discrete measures with arbitrary
/// positive marginals (transportation simplex). Degenerate pivots switch to
/// Bland's rule, which rules out cycling. Marginals must sum to the same
/// total within 1e-6.
inline TransportPlan solve_transport(const Matrix& cost, std::span<const double> a,
                                     std::span<const double> b) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (a.size() != n || b.size() != m)
    throw validation_error(errc::dimension_mismatch, "marginals vs cost matrix");
  double suma = 0.0, sumb = 0.0;
  for (double x : a) {
    if (!(x > 0.0)) throw validation_error(errc::weight_sum, "marginal a");
    suma += x;
  }
  for (double x : b) {
    if (!(x > 0.0)) throw validation_error(errc::weight_sum, "marginal b");
    sumb += x;
  }
  if (std::fabs(suma - sumb) > 1e-6 * std::max(suma, sumb))
    throw validation_error(errc::weight_sum, "marginal totals differ");

  detail::SimplexBasis basis(n, m);
  // Northwest-corner start: a monotone staircase of exactly n+m-1 cells.
  {
    std::vector<double> ra(a.begin(), a.end()), rb(b.begin(), b.end());
    // Absorb the total mismatch so the last cell closes exactly.
    const double fix = (suma - sumb) / static_cast<double>(m);
    for (double& x : rb) x += fix;
    std::size_t i = 0, j = 0;
    for (std::size_t count = 0; count + 1 < n + m; ++count) {
      const double t = std::min(ra[i], rb[j]);
      basis.flow[basis.cell(i, j)] = t;
      basis.add(basis.cell(i, j));
      ra[i] -= t;
      rb[j] -= t;
      if (count + 2 == n + m) break;
      if (ra[i] == 0.0 && i + 1 < n)
        ++i;
      else
        ++j;
    }
  }

  double cmax = 0.0;
  for (std::size_t c = 0; c < n * m; ++c)
    cmax = std::max(cmax, std::fabs(cost.data()[c]));
  const double tol = 1e-11 * (1.0 + cmax);

  std::vector<double> u(n), v(m);
  std::vector<std::size_t> parent_cell(n + m), bfs(n + m);
  std::vector<char> seen(n + m);
  bool bland = false;
  const std::size_t pivot_cap = 200 * (n + m) * std::max(n, m) + 1000;
  std::size_t pivots = 0;

  for (;; ++pivots) {
    if (pivots > pivot_cap)
      throw solver_error("transportation simplex exceeded pivot cap");
    // Duals from the basis tree: c_ij = u_i + v_j on basic cells.
    std::fill(seen.begin(), seen.end(), 0);
    std::size_t head = 0, tail = 0;
    bfs[tail++] = 0;
    seen[0] = 1;
    u[0] = 0.0;
    while (head < tail) {
      const std::size_t node = bfs[head++];
      for (std::size_t c : basis.adj[node]) {
        const std::size_t i = basis.row_of(c);
        const std::size_t jn = basis.n + basis.col_of(c);
        const std::size_t other = (node == i) ? jn : i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other == jn)
          v[other - n] = cost(i, other - n) - u[i];
        else
          u[other] = cost(other, node - n) - v[node - n];
        bfs[tail++] = other;
      }
    }

    // Entering cell: most negative reduced cost (first one in Bland mode).
    std::size_t enter = n * m;
    double best = -tol;
    for (std::size_t i = 0; i < n; ++i) {
      const auto crow = cost.row(i);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t c = basis.cell(i, j);
        if (basis.basic[c]) continue;
        const double rc = crow[j] - u[i] - v[j];
        if (rc < best) {
          best = rc;
          enter = c;
          if (bland) goto entering_done;
        }
      }
    }
  entering_done:
    if (enter == n * m) break;  // optimal

    // Cycle: tree path between the entering cell's endpoints.
    const std::size_t si = basis.row_of(enter);
    const std::size_t sj = basis.n + basis.col_of(enter);
    std::fill(seen.begin(), seen.end(), 0);
    head = tail = 0;
    bfs[tail++] = si;
    seen[si] = 1;
    parent_cell[si] = n * m;
    while (head < tail && !seen[sj]) {
      const std::size_t node = bfs[head++];
      for (std::size_t c : basis.adj[node]) {
        const std::size_t i = basis.row_of(c);
        const std::size_t jn = basis.n + basis.col_of(c);
        const std::size_t other = (node == i) ? jn : i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_cell[other] = c;
        bfs[tail++] = other;
      }
    }
    // Path cells from sj back to si alternate -theta, +theta, ...; theta is
    // the smallest flow on a -theta cell, and that cell leaves the basis
    // (smallest index among ties under Bland's rule).
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = n * m;
    {
      std::size_t node = sj;
      bool minus = true;
      while (node != si) {
        const std::size_t c = parent_cell[node];
        if (minus && (basis.flow[c] < theta ||
                      (basis.flow[c] == theta && bland && c < leave))) {
          theta = basis.flow[c];
          leave = c;
        }
        node = (node == basis.row_of(c)) ? basis.n + basis.col_of(c)
                                         : basis.row_of(c);
        minus = !minus;
      }
    }
    if (theta == 0.0) bland = true;  // degenerate pivot: anti-cycling mode
    if (theta > 0.0) bland = false;
    basis.flow[enter] = theta;
    {
      std::size_t node = sj;
      bool minus = true;
      while (node != si) {
        const std::size_t c = parent_cell[node];
        basis.flow[c] += minus ? -theta : theta;
        node = (node == basis.row_of(c)) ? basis.n + basis.col_of(c)
                                         : basis.row_of(c);
        minus = !minus;
      }
    }
    basis.flow[leave] = 0.0;
    basis.remove(leave);
    basis.add(enter);
  }

  TransportPlan out;
  out.plan = Matrix(n, m, 0.0);
  std::vector<double> terms;
  terms.reserve(n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t c = basis.cell(i, j);
      if (!basis.basic[c] || basis.flow[c] == 0.0) continue;
      const double f = std::max(basis.flow[c], 0.0);
      out.plan(i, j) = f;
      terms.push_back(f * cost(i, j));
    }
  out.cost = tree_sum(terms);
  out.iterations = pivots;
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += out.plan(i, j);
    err += std::fabs(s - a[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += out.plan(i, j);
    err += std::fabs(s - b[j]);
  }
  out.marginal_error = err;
  out.converged = true;
  return out;
}

namespace detail {

inline bool all_equal(std::span<const double> w) {
  for (double x : w)
    if (x != w[0]) return false;
  return true;
}

}  // namespace detail

/// Exact OT dispatcher: uniform marginals of equal size reduce to an
/// assignment (Birkhoff), everything else goes through the simplex.
inline TransportPlan solve_ot(const Matrix& cost, std::span<const double> a,
                              std::span<const double> b) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (n == m && detail::all_equal(a) && detail::all_equal(b) && a[0] == b[0]) {
    double raw = 0.0;
    const std::vector<std::size_t> assign = solve_assignment(cost, &raw);
    TransportPlan out;
    out.plan = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out.plan(i, assign[i]) = a[i];
    out.cost = raw * a[0];
    out.iterations = n;
    out.converged = true;
    return out;
  }
  return solve_transport(cost, a, b);
}

struct SinkhornOptions {
  double epsilon = 1e-3;
  std::size_t max_iter = 10000;
  double tol = 1e-9;  // L1 marginal violation
};

/// Entropic OT in the log domain. The plan is
/// pi_ij = a_i b_j exp((f_i + g_j - C_ij)/eps); after each g update the
/// column marginals hold exactly, so the reported error is the row L1 gap.
inline TransportPlan sinkhorn(const Matrix& cost, std::span<const double> a,
                              std::span<const double> b,
                              const SinkhornOptions& opt = {}) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (a.size() != n || b.size() != m)
    throw validation_error(errc::dimension_mismatch, "marginals vs cost matrix");
  if (!(opt.epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
  const double inv_eps = 1.0 / opt.epsilon;
  std::vector<double> f(n, 0.0), g(m, 0.0), loga(n), logb(m), buf(std::max(n, m));
  for (std::size_t i = 0; i < n; ++i) loga[i] = std::log(a[i]);
  for (std::size_t j = 0; j < m; ++j) logb[j] = std::log(b[j]);

  auto lse = [](std::span<const double> t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : t) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : t) s += std::exp(x - mx);
    return mx + std::log(s);
  };

  TransportPlan out;
  out.converged = false;
  std::size_t it = 0;
  double err = std::numeric_limits<double>::infinity();
  for (; it < opt.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto crow = cost.row(i);
      for (std::size_t j = 0; j < m; ++j)
        buf[j] = logb[j] + (g[j] - crow[j]) * inv_eps;
      f[i] = -opt.epsilon * lse({buf.data(), m});
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i)
        buf[i] = loga[i] + (f[i] - cost(i, j)) * inv_eps;
      g[j] = -opt.epsilon * lse({buf.data(), n});
    }
    err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto crow = cost.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        s += std::exp(loga[i] + logb[j] + (f[i] + g[j] - crow[j]) * inv_eps);
      err += std::fabs(s - a[i]);
    }
    if (err <= opt.tol) {
      out.converged = true;
      ++it;
      break;
    }
  }

  out.plan = Matrix(n, m);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto crow = cost.row(i);
    double row_cost = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double pij =
          std::exp(loga[i] + logb[j] + (f[i] + g[j] - crow[j]) * inv_eps);
      out.plan(i, j) = pij;
      row_cost += pij * crow[j];
    }
    terms[i] = row_cost;
  }
  out.cost = tree_sum(terms);
  out.iterations = it;
  out.marginal_error = err;
  return out;
}

/// <plan, cost> Frobenius inner product.
inline double transport_cost(const Matrix& plan, const Matrix& cost) {
  std::vector<double> terms(plan.rows());
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < plan.cols(); ++j) s += plan(i, j) * cost(i, j);
    terms[i] = s;
  }
  return tree_sum(terms);
}

/// C_ij = ||x_i - y_j||^2 for rows of two point matrices.
inline Matrix cost_matrix_sqeuclidean(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols())
    throw validation_error(errc::dimension_mismatch, "point dimensions");
  Matrix c(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j)
      c(i, j) = squared_distance(x.row(i), y.row(j));
  return c;
}

}  // namespace gwb

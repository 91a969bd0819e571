#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gwb/error.hpp"
#include "gwb/matrix.hpp"
#include "gwb/rng.hpp"
#include "gwb/spaces.hpp"

namespace gwb {

/// Simple undirected graph; edges stored as (u,v) with u < v, sorted, unique.
struct Graph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::optional<Matrix> node_features;

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [u, v] : edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    return adj;
  }
};

enum class GraphKind { ws, ba, rr };
enum class FeatureKind { none, normal1d, bernoulli };

struct GraphModel {
  GraphKind kind = GraphKind::ws;
  std::size_t ws_k = 4;        // even, < n
  double ws_rewire = 0.1;      // edge rewiring probability
  std::size_t ba_m = 2;        // edges per new node, < n
  std::size_t rr_degree = 3;   // regularity R, R*n even, < n
  FeatureKind feature_kind = FeatureKind::none;
  double bernoulli_p = 0.5;
};

namespace detail {

inline void normalize_edges(Graph& g) {
  for (auto& e : g.edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
}

inline Graph generate_ws(std::size_t n, std::size_t k, double p_rewire, Rng& rng) {
  if (k < 2 || k % 2 != 0 || k >= n)
    throw validation_error(errc::bad_argument,
                           "ring lattice needs even k in [2, n), got k=" +
                               std::to_string(k) + ", n=" + std::to_string(n));
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 1; d <= k / 2; ++d) {
      const std::size_t j = (i + d) % n;
      adj[i].insert(j);
      adj[j].insert(i);
    }
  // Rewire the far endpoint of each lattice edge with probability p_rewire,
  // visiting edges in the construction order.
  for (std::size_t d = 1; d <= k / 2; ++d)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + d) % n;
      if (!adj[i].count(j)) continue;  // already rewired away
      if (rng.uniform() >= p_rewire) continue;
      if (adj[i].size() >= n - 1) continue;  // i saturated, nothing to rewire to
      std::size_t w;
      do {
        w = rng.uniform_below(n);
      } while (w == i || adj[i].count(w));
      adj[i].erase(j);
      adj[j].erase(i);
      adj[i].insert(w);
      adj[w].insert(i);
    }
  Graph g;
  g.n = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : adj[i])
      if (i < j) g.edges.emplace_back(i, j);
  detail::normalize_edges(g);
  return g;
}

inline Graph generate_ba(std::size_t n, std::size_t m, Rng& rng) {
  if (m < 1 || m >= n)
    throw validation_error(errc::bad_argument,
                           "attachment count m must be in [1, n), got m=" +
                               std::to_string(m) + ", n=" + std::to_string(n));
  Graph g;
  g.n = n;
  // Seed graph: star on nodes 0..m (center 0), so every node has degree >= 1
  // and the edge count is m + m*(n-m-1) = m*(n-m).
  std::vector<std::size_t> endpoint_pool;
  for (std::size_t j = 1; j <= m; ++j) {
    g.edges.emplace_back(0, j);
    endpoint_pool.push_back(0);
    endpoint_pool.push_back(j);
  }
  std::vector<char> used(n, 0);
  for (std::size_t v = m + 1; v < n; ++v) {
    std::vector<std::size_t> chosen;
    while (chosen.size() < m) {
      const std::size_t t = endpoint_pool[rng.uniform_below(endpoint_pool.size())];
      if (used[t]) continue;
      used[t] = 1;
      chosen.push_back(t);
    }
    for (std::size_t t : chosen) {
      used[t] = 0;
      g.edges.emplace_back(t, v);
      endpoint_pool.push_back(t);
      endpoint_pool.push_back(v);
    }
  }
  detail::normalize_edges(g);
  return g;
}

inline Graph generate_rr(std::size_t n, std::size_t degree, Rng& rng) {
  if (degree < 1 || degree >= n || (degree * n) % 2 != 0)
    throw validation_error(errc::bad_argument,
                           "regular graph needs 1 <= R < n with R*n even, got R=" +
                               std::to_string(degree) + ", n=" + std::to_string(n));
  const std::size_t restarts = 10000;
  std::vector<std::size_t> stubs(n * degree);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < degree; ++d) stubs[i * degree + d] = i;
  for (std::size_t attempt = 0; attempt < restarts; ++attempt) {
    for (std::size_t i = stubs.size(); i > 1; --i)
      std::swap(stubs[i - 1], stubs[rng.uniform_below(i)]);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    bool ok = true;
    for (std::size_t i = 0; i < stubs.size() && ok; i += 2) {
      std::size_t u = stubs[i], v = stubs[i + 1];
      if (u > v) std::swap(u, v);
      if (u == v || !seen.emplace(u, v).second) ok = false;
    }
    if (!ok) continue;
    Graph g;
    g.n = n;
    g.edges.assign(seen.begin(), seen.end());
    return g;
  }
  throw solver_error("pairing model failed to produce a simple graph in 10000 tries");
}

}  // namespace detail

/// Features drawn after topology, so the topology stream is feature-independent.
inline void assign_features(Graph& g, FeatureKind kind, double bernoulli_p,
                            Rng& rng) {
  if (kind == FeatureKind::none) {
    g.node_features.reset();
    return;
  }
  Matrix f(g.n, 1);
  for (std::size_t i = 0; i < g.n; ++i)
    f(i, 0) = kind == FeatureKind::normal1d
                  ? rng.normal()
                  : (rng.uniform() < bernoulli_p ? 1.0 : 0.0);
  g.node_features = std::move(f);
}

inline Graph generate(const GraphModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw validation_error(errc::bad_argument, "need n >= 2 nodes");
  Rng rng(seed);
  Graph g;
  switch (model.kind) {
    case GraphKind::ws:
      g = detail::generate_ws(n, model.ws_k, model.ws_rewire, rng);
      break;
    case GraphKind::ba:
      g = detail::generate_ba(n, model.ba_m, rng);
      break;
    case GraphKind::rr:
      g = detail::generate_rr(n, model.rr_degree, rng);
      break;
  }
  assign_features(g, model.feature_kind, model.bernoulli_p, rng);
  return g;
}

inline bool is_connected(const Graph& g) {
  if (g.n == 0) return true;
  const auto adj = g.adjacency();
  std::vector<char> seen(g.n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++visited;
        stack.push_back(v);
      }
  }
  return visited == g.n;
}

/// Unit-length BFS hop distances from every node; uniform weights. A
/// disconnected graph is an error unless largest_component is set, in which
/// case the metric is built on the largest component (ties broken by the
/// smallest contained node index) and `kept` reports the surviving nodes.
inline MmSpace shortest_path_metric(const Graph& g, bool largest_component = false,
                                    std::vector<std::size_t>* kept = nullptr) {
  const auto adj = g.adjacency();
  std::vector<int> comp(g.n, -1);
  int ncomp = 0;
  for (std::size_t s = 0; s < g.n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u])
        if (comp[v] < 0) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
    }
    ++ncomp;
  }
  std::vector<std::size_t> nodes;
  if (ncomp == 1) {
    nodes.resize(g.n);
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  } else if (!largest_component) {
    throw validation_error(errc::infeasible,
                           "graph has " + std::to_string(ncomp) +
                               " components; hop metric needs a connected graph");
  } else {
    std::vector<std::size_t> sizes(ncomp, 0);
    for (std::size_t v = 0; v < g.n; ++v) ++sizes[comp[v]];
    const int best = static_cast<int>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t v = 0; v < g.n; ++v)
      if (comp[v] == best) nodes.push_back(v);
  }
  if (kept) *kept = nodes;

  const std::size_t k = nodes.size();
  std::vector<std::size_t> local(g.n, k);
  for (std::size_t i = 0; i < k; ++i) local[nodes[i]] = i;
  Matrix d(k, k, 0.0);
  std::vector<std::size_t> dist(g.n), queue(g.n);
  for (std::size_t i = 0; i < k; ++i) {
    std::fill(dist.begin(), dist.end(), g.n + 1);
    std::size_t head = 0, tail = 0;
    dist[nodes[i]] = 0;
    queue[tail++] = nodes[i];
    while (head < tail) {
      const std::size_t u = queue[head++];
      for (std::size_t v : adj[u])
        if (dist[v] > dist[u] + 1) {
          dist[v] = dist[u] + 1;
          queue[tail++] = v;
        }
    }
    for (std::size_t j = 0; j < k; ++j)
      d(i, j) = static_cast<double>(dist[nodes[j]]);
  }
  return MmSpace(std::move(d));
}

/// Relabels nodes by a permutation: node v becomes perm[v].
inline Graph relabel(const Graph& g, const std::vector<std::size_t>& perm) {
  Graph out;
  out.n = g.n;
  out.edges.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) out.edges.emplace_back(perm[u], perm[v]);
  detail::normalize_edges(out);
  if (g.node_features) {
    Matrix f(g.n, g.node_features->cols());
    for (std::size_t v = 0; v < g.n; ++v)
      for (std::size_t c = 0; c < f.cols(); ++c)
        f(perm[v], c) = (*g.node_features)(v, c);
    out.node_features = std::move(f);
  }
  return out;
}

/// Connected draw from the model; disconnected outcomes retry with an
/// incremented sub-seed, up to 100 times.
inline Graph generate_connected(const GraphModel& model, std::size_t n,
                                std::uint64_t seed,
                                std::size_t* attempts_out = nullptr) {
  for (std::size_t attempt = 0; attempt < 100; ++attempt) {
    Graph g = generate(model, n, attempt == 0 ? seed : derive_seed(seed, attempt));
    if (is_connected(g)) {
      if (attempts_out) *attempts_out = attempt + 1;
      return g;
    }
  }
  throw solver_error("no connected graph in 100 attempts");
}

struct GraphPair {
  StructuredSpace first;
  StructuredSpace second;
  Graph first_graph;
  Graph second_graph;
  bool isomorphic = false;
};

inline StructuredSpace space_from_graph(const Graph& g) {
  MmSpace base = shortest_path_metric(g);
  Matrix features = g.node_features ? *g.node_features : Matrix(g.n, 0);
  return StructuredSpace(std::move(base), std::move(features));
}

/// Isomorphic pairs are relabeled copies (distances and features permuted
/// consistently); non-isomorphic pairs are two independent draws.
inline GraphPair make_pair(const GraphModel& model, std::size_t n,
                           std::uint64_t seed, bool isomorphic) {
  GraphPair out;
  out.isomorphic = isomorphic;
  out.first_graph = generate_connected(model, n, derive_seed(seed, 0));
  if (isomorphic) {
    Rng rng(derive_seed(seed, 1));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
      std::swap(perm[i - 1], perm[rng.uniform_below(i)]);
    out.second_graph = relabel(out.first_graph, perm);
  } else {
    out.second_graph = generate_connected(model, n, derive_seed(seed, 1));
  }
  out.first = space_from_graph(out.first_graph);
  out.second = space_from_graph(out.second_graph);
  return out;
}

enum class WlVerdict { possibly_isomorphic, not_isomorphic };
enum class WlLabels { degree, feature_binned };

/// 1-WL color refinement on the disjoint union of both graphs: initial colors
/// from degrees or binned 1D features, then hash-free refinement via a shared
/// signature table. Not-isomorphic as soon as the color histograms differ.
inline WlVerdict wl_refinement(const Graph& g1, const Graph& g2,
                               std::size_t iterations,
                               WlLabels labels = WlLabels::degree,
                               std::size_t bins = 10) {
  if (g1.n != g2.n || g1.edges.size() != g2.edges.size())
    return WlVerdict::not_isomorphic;
  const auto adj1 = g1.adjacency();
  const auto adj2 = g2.adjacency();

  std::vector<std::size_t> c1(g1.n), c2(g2.n);
  if (labels == WlLabels::degree) {
    for (std::size_t v = 0; v < g1.n; ++v) c1[v] = adj1[v].size();
    for (std::size_t v = 0; v < g2.n; ++v) c2[v] = adj2[v].size();
  } else {
    if (!g1.node_features || !g2.node_features || bins == 0)
      throw validation_error(errc::bad_argument,
                             "feature-binned labels need 1D features and bins >= 1");
    double lo = (*g1.node_features)(0, 0), hi = lo;
    for (const Matrix* f : {&*g1.node_features, &*g2.node_features})
      for (std::size_t v = 0; v < f->rows(); ++v) {
        lo = std::min(lo, (*f)(v, 0));
        hi = std::max(hi, (*f)(v, 0));
      }
    const double width = hi > lo ? (hi - lo) : 1.0;
    auto bin = [&](double x) {
      const auto b = static_cast<std::size_t>((x - lo) / width *
                                              static_cast<double>(bins));
      return std::min(b, bins - 1);
    };
    for (std::size_t v = 0; v < g1.n; ++v) c1[v] = bin((*g1.node_features)(v, 0));
    for (std::size_t v = 0; v < g2.n; ++v) c2[v] = bin((*g2.node_features)(v, 0));
  }

  auto histograms_match = [&]() {
    std::map<std::size_t, long> counts;
    for (std::size_t c : c1) ++counts[c];
    for (std::size_t c : c2) --counts[c];
    for (const auto& [c, k] : counts)
      if (k != 0) return false;
    return true;
  };
  if (!histograms_match()) return WlVerdict::not_isomorphic;

  for (std::size_t round = 0; round < iterations; ++round) {
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> table;
    auto refine = [&](const std::vector<std::vector<std::size_t>>& adj,
                      const std::vector<std::size_t>& old) {
      std::vector<std::size_t> next(old.size());
      for (std::size_t v = 0; v < old.size(); ++v) {
        std::vector<std::size_t> sig;
        sig.reserve(adj[v].size());
        for (std::size_t u : adj[v]) sig.push_back(old[u]);
        std::sort(sig.begin(), sig.end());
        const auto [it, inserted] =
            table.emplace(std::make_pair(old[v], std::move(sig)), table.size());
        next[v] = it->second;
      }
      return next;
    };
    c1 = refine(adj1, c1);
    c2 = refine(adj2, c2);
    if (!histograms_match()) return WlVerdict::not_isomorphic;
  }
  return WlVerdict::possibly_isomorphic;
}

/// Graph JSON: {"n": int, "edges": [[u,v],...], "features": [[...]]?}.
inline Graph graph_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
    throw io_error(where + ": expected an object with 'n' and 'edges'");
  Graph g;
  g.n = j["n"].get<std::size_t>();
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2)
      throw io_error(where + ": edges must be [u,v] pairs");
    const auto u = e[0].get<std::size_t>();
    const auto v = e[1].get<std::size_t>();
    if (u >= g.n || v >= g.n || u == v)
      throw validation_error(errc::bad_argument,
                             where + ": bad edge " + std::to_string(u) + "-" +
                                 std::to_string(v));
    g.edges.emplace_back(u, v);
  }
  detail::normalize_edges(g);
  if (j.contains("features")) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : j["features"]) rows.push_back(r.get<std::vector<double>>());
    Matrix f = Matrix::from_rows(rows);
    if (f.rows() != g.n)
      throw validation_error(errc::feature_rows, where + ": feature rows");
    g.node_features = std::move(f);
  }
  return g;
}

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.n;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  if (g.node_features) {
    auto& rows = j["features"] = nlohmann::json::array();
    for (std::size_t i = 0; i < g.node_features->rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = 0; c < g.node_features->cols(); ++c)
        row.push_back((*g.node_features)(i, c));
      rows.push_back(std::move(row));
    }
  }
  return j;
}

}  // namespace gwb

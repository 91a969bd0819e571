#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "gwb/gwb.hpp"

namespace gwbcli {

namespace fs = std::filesystem;
using gwb::json;

namespace {

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

std::string out_path(const CommonOptions& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

json manifest_base(const CommonOptions& c) {
  json m;
  m["command"] = c.command_line;
  m["tool_version"] = gwb::kVersion;
  m["seed"] = c.seed;
  m["threads"] = c.threads;
  m["rng"] = "mt19937_64/polar";
  return m;
}

void write_manifest(const std::string& output_file, json manifest,
                    std::vector<std::string> outputs) {
  manifest["outputs"] = std::move(outputs);
  gwb::save_json(output_file + ".manifest.json", manifest);
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean =
      gwb::tree_sum(v) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return {mean, std::sqrt(acc / static_cast<double>(v.size() - 1))};
}

enum class BoundKind { flb, slb, tlb, ftlb, stlb, sftlb, gw_brute, fgw_entropic,
                       wl_d, wl_f };

BoundKind parse_bound(const std::string& name, bool allow_wl) {
  if (name == "flb") return BoundKind::flb;
  if (name == "slb") return BoundKind::slb;
  if (name == "tlb") return BoundKind::tlb;
  if (name == "ftlb") return BoundKind::ftlb;
  if (name == "stlb") return BoundKind::stlb;
  if (name == "sftlb") return BoundKind::sftlb;
  if (name == "gw-brute") return BoundKind::gw_brute;
  if (name == "fgw-entropic") return BoundKind::fgw_entropic;
  if (allow_wl && name == "wl-d") return BoundKind::wl_d;
  if (allow_wl && name == "wl-f") return BoundKind::wl_f;
  throw gwb::validation_error(gwb::errc::bad_argument, "unknown bound: " + name);
}

bool needs_features(BoundKind k) {
  return k == BoundKind::ftlb || k == BoundKind::sftlb ||
         k == BoundKind::fgw_entropic || k == BoundKind::wl_f;
}

bool is_sliced(BoundKind k) {
  return k == BoundKind::stlb || k == BoundKind::sftlb;
}

gwb::BoundConfig make_config(const BoundFlags& f, const CommonOptions& c) {
  gwb::BoundConfig cfg;
  cfg.p = f.p;
  cfg.alpha = f.alpha;
  cfg.num_projections = f.num_projections;
  cfg.seed = c.seed;
  cfg.threads = 1;  // dist/isotest parallelize over pairs, not inside a pair
  if (f.solver == "exact") {
    cfg.outer_solver = gwb::OuterSolver::exact;
  } else if (f.solver == "sinkhorn") {
    cfg.outer_solver = gwb::OuterSolver::sinkhorn;
    cfg.sinkhorn_options.epsilon = f.epsilon;
  } else {
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "unknown solver: " + f.solver);
  }
  return cfg;
}

gwb::GraphModel make_model(const std::string& model, std::size_t ws_k,
                           double ws_rewire, std::size_t ba_m,
                           std::size_t rr_degree, const std::string& features,
                           double bernoulli_p) {
  gwb::GraphModel m;
  if (model == "ws") {
    m.kind = gwb::GraphKind::ws;
  } else if (model == "ba") {
    m.kind = gwb::GraphKind::ba;
  } else if (model == "rr") {
    m.kind = gwb::GraphKind::rr;
  } else {
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "unknown model: " + model);
  }
  m.ws_k = ws_k;
  m.ws_rewire = ws_rewire;
  m.ba_m = ba_m;
  m.rr_degree = rr_degree;
  if (features == "none") {
    m.feature_kind = gwb::FeatureKind::none;
  } else if (features == "normal") {
    m.feature_kind = gwb::FeatureKind::normal1d;
  } else if (features == "bernoulli") {
    m.feature_kind = gwb::FeatureKind::bernoulli;
  } else {
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "unknown feature kind: " + features);
  }
  m.bernoulli_p = bernoulli_p;
  return m;
}

/// Midpoint rule of size --r, or, when r=0, of size n for uniform equal-size
/// inputs (every pair then shares one rule, as the shared directions require).
gwb::QuadratureRule shared_rule(std::size_t r,
                                const std::vector<gwb::SpaceFile>& spaces) {
  if (r > 0) return gwb::midpoint_rule(r);
  const std::size_t n = spaces.front().space.size();
  for (const auto& s : spaces)
    if (s.space.size() != n || !std::all_of(s.space.weights.begin(),
                                            s.space.weights.end(),
                                            [&](double w) {
                                              return w == s.space.weights[0];
                                            }))
      throw gwb::validation_error(
          gwb::errc::bad_argument,
          "automatic quadrature needs uniform equal-size inputs; pass --r");
  return gwb::midpoint_rule(n);
}

gwb::StructuredSpace structured(const gwb::SpaceFile& f, const std::string& name) {
  if (!f.features)
    throw gwb::validation_error(gwb::errc::feature_rows,
                                name + " requires inputs with features");
  return gwb::StructuredSpace(f.space, *f.features);
}

json bound_config_json(const BoundFlags& f, std::size_t rule_size) {
  json j;
  j["bound"] = f.bound;
  j["p"] = f.p;
  j["alpha"] = f.alpha;
  j["r"] = rule_size;
  j["L"] = f.num_projections;
  j["solver"] = f.solver;
  j["epsilon"] = f.epsilon;
  return j;
}

void write_rows_csv(const std::string& path,
                    const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gwb::io_error("cannot write " + path);
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw gwb::io_error("write failed: " + path);
}

}  // namespace

int run_dist(const DistOptions& o) {
  if (o.inputs.size() < 2)
    throw gwb::validation_error(gwb::errc::bad_argument, "need >= 2 input files");
  const BoundKind kind = parse_bound(o.bound.bound, /*allow_wl=*/false);

  StopWatch load_watch;
  std::vector<gwb::SpaceFile> spaces;
  spaces.reserve(o.inputs.size());
  for (const auto& path : o.inputs) spaces.push_back(gwb::load_space(path));
  const double load_seconds = load_watch.seconds();

  gwb::BoundConfig cfg = make_config(o.bound, o.common);
  std::size_t feature_dim = 0;
  if (needs_features(kind)) {
    for (std::size_t i = 0; i < spaces.size(); ++i)
      structured(spaces[i], o.bound.bound);  // validates presence
    feature_dim = spaces.front().features->cols();
    for (const auto& s : spaces)
      if (s.features->cols() != feature_dim)
        throw gwb::validation_error(gwb::errc::dimension_mismatch,
                                    "feature dimensions differ across inputs");
  }
  gwb::ProjectionSet proj;
  if (is_sliced(kind)) {
    cfg.rule = shared_rule(o.bound.r, spaces);
    proj = gwb::sample_directions(o.common.seed, o.bound.num_projections,
                                  cfg.rule.size() + feature_dim);
  }

  StopWatch compute_watch;
  const std::size_t k = spaces.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  gwb::Matrix dist(k, k, 0.0);
  std::vector<char> converged(pairs.size(), 1);
  gwb::parallel_for(pairs.size(), o.common.threads, [&](std::size_t pi) {
    const auto [i, j] = pairs[pi];
    gwb::DistanceResult r;
    switch (kind) {
      case BoundKind::flb:
        r = gwb::flb(spaces[i].space, spaces[j].space, cfg.p);
        break;
      case BoundKind::slb:
        r = gwb::slb(spaces[i].space, spaces[j].space, cfg.p);
        break;
      case BoundKind::tlb:
        r = gwb::tlb(spaces[i].space, spaces[j].space, cfg);
        break;
      case BoundKind::ftlb:
        r = gwb::ftlb(structured(spaces[i], "ftlb"), structured(spaces[j], "ftlb"),
                      cfg);
        break;
      case BoundKind::stlb:
        r = gwb::stlb(spaces[i].space, spaces[j].space, cfg, proj);
        break;
      case BoundKind::sftlb:
        r = gwb::sftlb(structured(spaces[i], "sftlb"),
                       structured(spaces[j], "sftlb"), cfg, proj);
        break;
      case BoundKind::gw_brute:
        r = gwb::gw_bruteforce(spaces[i].space, spaces[j].space, cfg.p);
        break;
      case BoundKind::fgw_entropic:
        r = gwb::fgw_entropic(structured(spaces[i], "fgw-entropic"),
                              structured(spaces[j], "fgw-entropic"), cfg);
        break;
      default:
        throw gwb::validation_error(gwb::errc::bad_argument,
                                    "bound unavailable in dist");
    }
    dist(i, j) = r.value;
    dist(j, i) = r.value;
    converged[pi] = r.metadata.converged ? 1 : 0;
  });
  const double compute_seconds = compute_watch.seconds();
  if (!std::all_of(converged.begin(), converged.end(), [](char c) { return c; }))
    throw gwb::solver_error("solver did not converge on at least one pair");

  StopWatch write_watch;
  std::string output;
  if (o.common.format == "json") {
    output = out_path(o.common, "dist.json");
    json j;
    j["bound"] = o.bound.bound;
    j["inputs"] = o.inputs;
    auto& rows = j["matrix"] = json::array();
    for (std::size_t i = 0; i < k; ++i) {
      json row = json::array();
      for (std::size_t c = 0; c < k; ++c) row.push_back(dist(i, c));
      rows.push_back(std::move(row));
    }
    gwb::save_json(output, j);
  } else {
    output = out_path(o.common, "dist.csv");
    gwb::write_csv_matrix(output, dist);
  }

  json manifest = manifest_base(o.common);
  manifest["config"] = bound_config_json(o.bound, cfg.rule.size());
  manifest["config"]["direction_seed"] = proj.seed;
  manifest["inputs"] = o.inputs;
  manifest["timings"] = {{"load_seconds", load_seconds},
                         {"compute_seconds", compute_seconds},
                         {"write_seconds", write_watch.seconds()}};
  write_manifest(output, std::move(manifest), {output});
  std::printf("dist: %zu x %zu %s matrix -> %s\n", k, k, o.bound.bound.c_str(),
              output.c_str());
  return 0;
}

namespace {

double knn_split_accuracy(const gwb::Matrix& dist, const std::vector<int>& labels,
                          const std::vector<std::size_t>& train,
                          const std::vector<std::size_t>& test, std::size_t k) {
  std::size_t correct = 0;
  std::vector<std::pair<double, std::size_t>> cand(train.size());
  for (std::size_t t : test) {
    for (std::size_t c = 0; c < train.size(); ++c)
      cand[c] = {dist(t, train[c]), train[c]};
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k),
                      cand.end());
    // vote: majority, ties by smaller summed distance, then lower class index
    std::map<int, std::pair<std::size_t, double>> votes;
    for (std::size_t c = 0; c < k; ++c) {
      auto& v = votes[labels[cand[c].second]];
      v.first += 1;
      v.second += cand[c].first;
    }
    int best_class = votes.begin()->first;
    auto best = votes.begin()->second;
    for (const auto& [cls, v] : votes)
      if (v.first > best.first ||
          (v.first == best.first && v.second < best.second))
        best_class = cls, best = v;
    if (best_class == labels[t]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

int run_knn(const KnnOptions& o) {
  StopWatch load_watch;
  const gwb::Matrix dist = gwb::read_csv_matrix(o.matrix_path);
  if (dist.rows() != dist.cols())
    throw gwb::validation_error(gwb::errc::not_square, "distance matrix");
  const gwb::Matrix label_col = gwb::read_csv_matrix(o.labels_path);
  if (label_col.rows() != dist.rows() || label_col.cols() != 1)
    throw gwb::validation_error(gwb::errc::dimension_mismatch,
                                "labels must be one value per matrix row");
  std::vector<int> labels(dist.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = label_col(i, 0);
    if (v != std::floor(v))
      throw gwb::validation_error(gwb::errc::bad_argument,
                                  "labels must be integers");
    labels[i] = static_cast<int>(v);
  }
  const double load_seconds = load_watch.seconds();

  if (o.splits == 0)
    throw gwb::validation_error(gwb::errc::bad_argument, "need >= 1 split");
  if (!(o.train_frac > 0.0 && o.train_frac < 1.0))
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "train fraction must lie in (0,1)");
  const std::size_t n = dist.rows();
  if (n < 2)
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "need >= 2 samples to split");

  // Splits are stratified: each label group is shuffled separately and
  // contributes round(train_frac * size) items to the training set, at least
  // one and, when the group has a second member, at most size - 1. A flat
  // shuffle can leave a class without training items, which measures split
  // luck instead of the metric.
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels[i]].push_back(i);
  std::size_t n_train = 0;
  for (const auto& [label, members] : groups) {
    const std::size_t size = members.size();
    std::size_t take = static_cast<std::size_t>(
        std::lround(o.train_frac * static_cast<double>(size)));
    take = std::clamp<std::size_t>(take, 1, std::max<std::size_t>(size - 1, 1));
    n_train += take;
  }
  if (n_train >= n)
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "train fraction leaves no test items");
  if (o.k == 0 || o.k > n_train)
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "k must lie in [1, " + std::to_string(n_train) +
                                    "] for this split");

  StopWatch compute_watch;
  std::vector<double> accuracies(o.splits);
  gwb::parallel_for(o.splits, o.common.threads, [&](std::size_t s) {
    gwb::Rng rng(gwb::derive_seed(o.common.seed, s));
    std::vector<std::size_t> train, test;
    for (const auto& [label, members] : groups) {
      std::vector<std::size_t> order = members;
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_below(i)]);
      const std::size_t size = order.size();
      std::size_t take = static_cast<std::size_t>(
          std::lround(o.train_frac * static_cast<double>(size)));
      take = std::clamp<std::size_t>(take, 1, std::max<std::size_t>(size - 1, 1));
      train.insert(train.end(), order.begin(), order.begin() + static_cast<long>(take));
      test.insert(test.end(), order.begin() + static_cast<long>(take), order.end());
    }
    accuracies[s] = knn_split_accuracy(dist, labels, train, test, o.k);
  });
  const double compute_seconds = compute_watch.seconds();
  const auto [mean, std_dev] = mean_std(accuracies);

  std::string output;
  if (o.common.format == "json") {
    output = out_path(o.common, "knn.json");
    json j;
    j["mean_accuracy"] = mean;
    j["std_accuracy"] = std_dev;
    j["per_split"] = accuracies;
    gwb::save_json(output, j);
  } else {
    output = out_path(o.common, "knn.csv");
    std::vector<std::string> rows{"split,accuracy"};
    for (std::size_t s = 0; s < o.splits; ++s)
      rows.push_back(std::to_string(s) + "," + gwb::format_double(accuracies[s]));
    write_rows_csv(output, rows);
  }

  json manifest = manifest_base(o.common);
  manifest["config"] = {{"k", o.k},
                        {"splits", o.splits},
                        {"train_frac", o.train_frac},
                        {"matrix", o.matrix_path},
                        {"labels", o.labels_path}};
  manifest["summary"] = {{"mean_accuracy", mean}, {"std_accuracy", std_dev}};
  manifest["timings"] = {{"load_seconds", load_seconds},
                         {"compute_seconds", compute_seconds}};
  write_manifest(output, std::move(manifest), {output});
  std::printf("knn: mean=%s std=%s (%zu splits) -> %s\n",
              gwb::format_double(mean).c_str(),
              gwb::format_double(std_dev).c_str(), o.splits, output.c_str());
  return 0;
}

int run_isotest(const IsotestOptions& o) {
  if (o.pairs == 0 || o.pairs % 2 != 0)
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "pairs must be even and positive");
  const gwb::GraphModel model =
      make_model(o.model, o.ws_k, o.ws_rewire, o.ba_m, o.rr_degree, o.features,
                 o.bernoulli_p);
  std::vector<BoundKind> kinds;
  for (const auto& name : o.bounds) kinds.push_back(parse_bound(name, true));

  gwb::BoundConfig cfg = make_config(o.bound, o.common);
  const std::size_t rule_size = o.bound.r > 0 ? o.bound.r : o.n;
  cfg.rule = gwb::midpoint_rule(rule_size);
  const std::size_t feature_dim =
      model.feature_kind == gwb::FeatureKind::none ? 0 : 1;
  for (BoundKind k : kinds)
    if (needs_features(k) && feature_dim == 0)
      throw gwb::validation_error(gwb::errc::bad_argument,
                                  "fused bounds need --features");
  // One direction set per sliced dimension, shared by every pair and repeat.
  gwb::ProjectionSet proj_stlb, proj_sftlb;
  if (std::count_if(kinds.begin(), kinds.end(),
                    [](BoundKind k) { return k == BoundKind::stlb; }))
    proj_stlb =
        gwb::sample_directions(o.common.seed, o.bound.num_projections, rule_size);
  if (std::count_if(kinds.begin(), kinds.end(),
                    [](BoundKind k) { return k == BoundKind::sftlb; }))
    proj_sftlb = gwb::sample_directions(o.common.seed, o.bound.num_projections,
                                        rule_size + feature_dim);

  StopWatch compute_watch;
  // accuracy[bound][repeat]
  std::vector<std::vector<double>> accuracy(kinds.size(),
                                            std::vector<double>(o.repeats));
  for (std::size_t rep = 0; rep < o.repeats; ++rep) {
    const std::uint64_t rep_seed = gwb::derive_seed(o.common.seed, rep);
    std::vector<gwb::GraphPair> batch(o.pairs);
    gwb::parallel_for(o.pairs, o.common.threads, [&](std::size_t pi) {
      const bool iso = o.all_isomorphic || pi % 2 == 0;
      batch[pi] = gwb::make_pair(model, o.n, gwb::derive_seed(rep_seed, pi), iso);
    });
    for (std::size_t b = 0; b < kinds.size(); ++b) {
      const BoundKind kind = kinds[b];
      std::vector<double> value(o.pairs, 0.0);
      std::vector<char> pred(o.pairs, 0);
      if (kind == BoundKind::wl_d || kind == BoundKind::wl_f) {
        gwb::parallel_for(o.pairs, o.common.threads, [&](std::size_t pi) {
          const auto verdict = gwb::wl_refinement(
              batch[pi].first_graph, batch[pi].second_graph, o.wl_iterations,
              kind == BoundKind::wl_d ? gwb::WlLabels::degree
                                      : gwb::WlLabels::feature_binned,
              o.wl_bins);
          pred[pi] = verdict == gwb::WlVerdict::possibly_isomorphic ? 1 : 0;
        });
      } else {
        gwb::parallel_for(o.pairs, o.common.threads, [&](std::size_t pi) {
          const gwb::StructuredSpace& x = batch[pi].first;
          const gwb::StructuredSpace& y = batch[pi].second;
          gwb::DistanceResult r;
          switch (kind) {
            case BoundKind::flb: r = gwb::flb(x.base, y.base, cfg.p); break;
            case BoundKind::slb: r = gwb::slb(x.base, y.base, cfg.p); break;
            case BoundKind::tlb: r = gwb::tlb(x.base, y.base, cfg); break;
            case BoundKind::ftlb: r = gwb::ftlb(x, y, cfg); break;
            case BoundKind::stlb: r = gwb::stlb(x.base, y.base, cfg, proj_stlb); break;
            case BoundKind::sftlb: r = gwb::sftlb(x, y, cfg, proj_sftlb); break;
            case BoundKind::gw_brute:
              r = gwb::gw_bruteforce(x.base, y.base, cfg.p);
              break;
            case BoundKind::fgw_entropic: r = gwb::fgw_entropic(x, y, cfg); break;
            default: break;
          }
          value[pi] = r.value;
        });
        // The 50% most similar pairs are called isomorphic; exact zeros are
        // called isomorphic regardless of rank. Ranking is a stable sort by
        // (value, pair index).
        std::vector<std::size_t> order(o.pairs);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t c) {
                           return value[a] < value[c];
                         });
        for (std::size_t rank = 0; rank < o.pairs; ++rank)
          if (rank < o.pairs / 2 || value[order[rank]] == 0.0)
            pred[order[rank]] = 1;
      }
      std::size_t correct = 0;
      for (std::size_t pi = 0; pi < o.pairs; ++pi) {
        const bool truth = o.all_isomorphic || pi % 2 == 0;
        if (static_cast<bool>(pred[pi]) == truth) ++correct;
      }
      accuracy[b][rep] =
          static_cast<double>(correct) / static_cast<double>(o.pairs);
    }
  }
  const double compute_seconds = compute_watch.seconds();

  std::string output;
  std::vector<std::string> rows{"bound,repeat,accuracy"};
  json summary = json::array();
  for (std::size_t b = 0; b < kinds.size(); ++b) {
    for (std::size_t rep = 0; rep < o.repeats; ++rep)
      rows.push_back(o.bounds[b] + "," + std::to_string(rep) + "," +
                     gwb::format_double(accuracy[b][rep]));
    const auto [mean, std_dev] = mean_std(accuracy[b]);
    summary.push_back({{"bound", o.bounds[b]},
                       {"mean_accuracy", mean},
                       {"std_accuracy", std_dev}});
    std::printf("isotest: %s mean=%s std=%s\n", o.bounds[b].c_str(),
                gwb::format_double(mean).c_str(),
                gwb::format_double(std_dev).c_str());
  }
  if (o.common.format == "json") {
    output = out_path(o.common, "isotest.json");
    json j;
    j["summary"] = summary;
    auto& acc = j["accuracy"] = json::object();
    for (std::size_t b = 0; b < kinds.size(); ++b) acc[o.bounds[b]] = accuracy[b];
    gwb::save_json(output, j);
  } else {
    output = out_path(o.common, "isotest.csv");
    write_rows_csv(output, rows);
  }

  json manifest = manifest_base(o.common);
  manifest["config"] = bound_config_json(o.bound, rule_size);
  manifest["config"]["model"] = o.model;
  manifest["config"]["n"] = o.n;
  manifest["config"]["pairs"] = o.pairs;
  manifest["config"]["repeats"] = o.repeats;
  manifest["config"]["features"] = o.features;
  manifest["config"]["wl_iterations"] = o.wl_iterations;
  manifest["summary"] = summary;
  manifest["timings"] = {{"compute_seconds", compute_seconds}};
  write_manifest(output, std::move(manifest), {output});
  return 0;
}

int run_bench(const BenchOptions& o) {
  if (o.sizes.size() < 2)
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "need at least two sizes for a trend");
  std::vector<BoundKind> kinds;
  for (const auto& name : o.bounds) kinds.push_back(parse_bound(name, false));

  StopWatch compute_watch;
  std::vector<std::string> rows{"bound,n,repeat,seconds"};
  json summary = json::array();
  for (std::size_t si = 0; si < o.sizes.size(); ++si) {
    const std::size_t n = o.sizes[si];
    // Fresh instance pair per repeat: random normal clouds with 1D normal
    // features, distances Euclidean.
    std::vector<gwb::StructuredSpace> xs, ys;
    for (std::size_t t = 0; t < o.repeats; ++t) {
      auto instance = [&](std::uint64_t salt) {
        gwb::Rng rng(gwb::derive_seed(o.common.seed, si * 10000 + 2 * t + salt));
        gwb::Matrix pts(n, o.dim);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t c = 0; c < o.dim; ++c) pts(i, c) = rng.normal();
        gwb::Matrix feat(n, 1);
        for (std::size_t i = 0; i < n; ++i) feat(i, 0) = rng.normal();
        return gwb::StructuredSpace(gwb::mm_from_point_cloud(gwb::PointCloud(pts)),
                                    std::move(feat));
      };
      xs.push_back(instance(0));
      ys.push_back(instance(1));
    }
    for (std::size_t b = 0; b < kinds.size(); ++b) {
      gwb::BoundConfig cfg = make_config(o.bound, o.common);
      if (is_sliced(kinds[b]))
        cfg.rule = gwb::midpoint_rule(o.bound.r > 0 ? o.bound.r : n);
      std::vector<double> seconds(o.repeats);
      for (std::size_t t = 0; t < o.repeats; ++t) {
        StopWatch watch;
        gwb::DistanceResult r;
        switch (kinds[b]) {
          case BoundKind::flb: r = gwb::flb(xs[t].base, ys[t].base, cfg.p); break;
          case BoundKind::slb: r = gwb::slb(xs[t].base, ys[t].base, cfg.p); break;
          case BoundKind::tlb: r = gwb::tlb(xs[t].base, ys[t].base, cfg); break;
          case BoundKind::ftlb: r = gwb::ftlb(xs[t], ys[t], cfg); break;
          case BoundKind::stlb: r = gwb::stlb(xs[t].base, ys[t].base, cfg); break;
          case BoundKind::sftlb: r = gwb::sftlb(xs[t], ys[t], cfg); break;
          case BoundKind::gw_brute:
            r = gwb::gw_bruteforce(xs[t].base, ys[t].base, cfg.p);
            break;
          case BoundKind::fgw_entropic:
            r = gwb::fgw_entropic(xs[t], ys[t], cfg);
            break;
          default: break;
        }
        (void)r;
        seconds[t] = watch.seconds();
        rows.push_back(o.bounds[b] + "," + std::to_string(n) + "," +
                       std::to_string(t) + "," +
                       gwb::format_double(seconds[t]));
      }
      const auto [mean, std_dev] = mean_std(seconds);
      std::vector<double> sorted = seconds;
      std::sort(sorted.begin(), sorted.end());
      summary.push_back({{"bound", o.bounds[b]},
                         {"n", n},
                         {"mean_seconds", mean},
                         {"std_seconds", std_dev},
                         {"median_seconds", sorted[sorted.size() / 2]}});
      std::printf("bench: %s n=%zu mean=%ss std=%ss\n", o.bounds[b].c_str(), n,
                  gwb::format_double(mean).c_str(),
                  gwb::format_double(std_dev).c_str());
    }
  }

  std::string output;
  if (o.common.format == "json") {
    output = out_path(o.common, "bench.json");
    json j;
    j["summary"] = summary;
    gwb::save_json(output, j);
  } else {
    output = out_path(o.common, "bench.csv");
    write_rows_csv(output, rows);
  }
  json manifest = manifest_base(o.common);
  manifest["config"] = bound_config_json(o.bound, o.bound.r);
  manifest["config"]["sizes"] = o.sizes;
  manifest["config"]["repeats"] = o.repeats;
  manifest["config"]["dim"] = o.dim;
  manifest["summary"] = summary;
  manifest["timings"] = {{"compute_seconds", compute_watch.seconds()}};
  write_manifest(output, std::move(manifest), {output});
  return 0;
}

int run_bary(const BaryOptions& o) {
  if (o.targets.empty())
    throw gwb::validation_error(gwb::errc::bad_argument, "need >= 1 target file");
  StopWatch load_watch;
  std::vector<gwb::MmSpace> targets;
  for (const auto& path : o.targets) targets.push_back(gwb::load_space(path).space);
  const double load_seconds = load_watch.seconds();

  gwb::BarycenterConfig cfg;
  cfg.n_points = o.n_points;
  cfg.dim = o.dim;
  cfg.steps = o.steps;
  cfg.step_size = o.step_size;
  cfg.restarts = o.restarts;
  cfg.r = o.r;
  cfg.num_projections = o.num_projections;
  cfg.seed = o.common.seed;
  cfg.threads = o.common.threads;
  if (o.distance == "tlb") {
    cfg.distance = gwb::BaryDistance::tlb;
  } else if (o.distance == "stlb") {
    cfg.distance = gwb::BaryDistance::stlb;
  } else {
    throw gwb::validation_error(gwb::errc::bad_argument,
                                "barycenter distance must be tlb or stlb");
  }
  if (!o.warm_start_path.empty()) {
    cfg.warm_start = gwb::read_csv_matrix(o.warm_start_path);
    cfg.n_points = cfg.warm_start->rows();
    cfg.dim = cfg.warm_start->cols();
  }

  StopWatch compute_watch;
  const gwb::BarycenterResult result = gwb::solve(targets, cfg);
  const double compute_seconds = compute_watch.seconds();

  const std::string points_path = out_path(o.common, "bary_points.csv");
  gwb::write_csv_matrix(points_path, result.points);
  const std::string trace_path = out_path(o.common, "bary_trace.csv");
  {
    std::vector<std::string> rows;
    rows.reserve(result.loss_trace.size());
    for (double v : result.loss_trace) rows.push_back(gwb::format_double(v));
    write_rows_csv(trace_path, rows);
  }

  json manifest = manifest_base(o.common);
  manifest["config"] = {{"distance", o.distance},
                        {"n_points", cfg.n_points},
                        {"dim", cfg.dim},
                        {"steps", cfg.steps},
                        {"step_size", cfg.step_size},
                        {"restarts", cfg.restarts},
                        {"r", cfg.r},
                        {"L", cfg.num_projections}};
  manifest["result"] = {{"best_restart", result.best_restart},
                        {"final_losses", result.final_losses},
                        {"aborted_restarts",
                         std::vector<int>(result.aborted.begin(),
                                          result.aborted.end())}};
  manifest["timings"] = {{"load_seconds", load_seconds},
                         {"compute_seconds", compute_seconds}};
  write_manifest(points_path, std::move(manifest), {points_path, trace_path});
  std::printf("bary: final loss %s (restart %zu) -> %s\n",
              gwb::format_double(result.final_losses[result.best_restart]).c_str(),
              result.best_restart, points_path.c_str());
  return 0;
}

int run_gen_shape(const GenShapeOptions& o) {
  const gwb::PointCloud cloud =
      gwb::make_shape(gwb::shape_from_name(o.kind), o.n, o.jitter, o.common.seed);
  const gwb::MmSpace space = gwb::mm_from_point_cloud(cloud);
  gwb::save_space(o.out_path, space);
  if (!o.points_path.empty()) gwb::write_csv_matrix(o.points_path, cloud.points);
  json manifest = manifest_base(o.common);
  manifest["config"] = {{"kind", o.kind}, {"n", o.n}, {"jitter", o.jitter}};
  std::vector<std::string> outputs{o.out_path};
  if (!o.points_path.empty()) outputs.push_back(o.points_path);
  write_manifest(o.out_path, std::move(manifest), outputs);
  std::printf("gen shape: %s n=%zu -> %s\n", o.kind.c_str(), o.n,
              o.out_path.c_str());
  return 0;
}

int run_gen_graph(const GenGraphOptions& o) {
  const gwb::GraphModel model =
      make_model(o.model, o.ws_k, o.ws_rewire, o.ba_m, o.rr_degree, o.features,
                 o.bernoulli_p);
  const gwb::Graph g = gwb::generate(model, o.n, o.common.seed);
  gwb::save_json(o.out_path, gwb::graph_to_json(g));
  std::vector<std::string> outputs{o.out_path};
  if (!o.space_path.empty()) {
    std::vector<std::size_t> kept;
    const gwb::MmSpace space =
        gwb::shortest_path_metric(g, o.largest_component, &kept);
    std::optional<gwb::Matrix> features;
    if (g.node_features) {
      gwb::Matrix f(kept.size(), g.node_features->cols());
      for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t c = 0; c < f.cols(); ++c)
          f(i, c) = (*g.node_features)(kept[i], c);
      features = std::move(f);
    }
    gwb::save_space(o.space_path, space, features);
    outputs.push_back(o.space_path);
  }
  json manifest = manifest_base(o.common);
  manifest["config"] = {{"model", o.model},
                        {"n", o.n},
                        {"features", o.features},
                        {"edges", g.edges.size()}};
  write_manifest(o.out_path, std::move(manifest), outputs);
  std::printf("gen graph: %s n=%zu edges=%zu -> %s\n", o.model.c_str(), o.n,
              g.edges.size(), o.out_path.c_str());
  return 0;
}

int run_gen_shapeset(const GenShapesetOptions& o) {
  const gwb::ShapeKind kinds[4] = {gwb::ShapeKind::ring, gwb::ShapeKind::ellipse,
                                   gwb::ShapeKind::star, gwb::ShapeKind::cross};
  std::vector<std::string> outputs;
  std::vector<std::string> labels{"label"};
  for (std::size_t cls = 0; cls < 4; ++cls)
    for (std::size_t i = 0; i < o.per_class; ++i) {
      const std::size_t idx = cls * o.per_class + i;
      const gwb::PointCloud cloud = gwb::make_shape(
          kinds[cls], o.n, o.jitter, gwb::derive_seed(o.common.seed, idx));
      char name[32];
      std::snprintf(name, sizeof(name), "shape_%03zu.json", idx);
      const std::string path = out_path(o.common, name);
      gwb::save_space(path, gwb::mm_from_point_cloud(cloud));
      outputs.push_back(path);
      labels.push_back(std::to_string(cls));
    }
  const std::string labels_path = out_path(o.common, "labels.csv");
  // labels.csv carries no header so it can feed knn directly
  labels.erase(labels.begin());
  write_rows_csv(labels_path, labels);
  outputs.push_back(labels_path);
  json manifest = manifest_base(o.common);
  manifest["config"] = {{"classes", 4},
                        {"per_class", o.per_class},
                        {"n", o.n},
                        {"jitter", o.jitter}};
  write_manifest(labels_path, std::move(manifest), outputs);
  std::printf("gen shapes: %zu files + labels -> %s\n", outputs.size() - 1,
              o.common.out_dir.c_str());
  return 0;
}

}  // namespace gwbcli

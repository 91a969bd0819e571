#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gwb/error.hpp"
#include "gwb/version.hpp"

namespace {

std::string joined_command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void add_common(CLI::App* cmd, gwbcli::CommonOptions& c) {
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--threads", c.threads, "worker threads (1 = serial)");
  cmd->add_option("--out", c.out_dir, "output directory");
  cmd->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void add_bound_flags(CLI::App* cmd, gwbcli::BoundFlags& b, bool with_bound) {
  if (with_bound)
    cmd->add_option("--bound", b.bound, "bound to compute")
        ->check(CLI::IsMember({"flb", "slb", "tlb", "ftlb", "stlb", "sftlb",
                               "gw-brute", "fgw-entropic"}));
  cmd->add_option("--p", b.p, "order of the underlying distances (p >= 1)");
  cmd->add_option("--alpha", b.alpha, "structure/feature trade-off in [0,1]");
  cmd->add_option("--r", b.r, "quadrature size (0 = match input size)");
  cmd->add_option("--L", b.num_projections, "number of projection directions");
  cmd->add_option("--solver", b.solver, "outer transport solver")
      ->check(CLI::IsMember({"exact", "sinkhorn"}));
  cmd->add_option("--epsilon", b.epsilon, "sinkhorn regularization");
}

void add_model_flags(CLI::App* cmd, std::string& model, std::size_t& n,
                     std::size_t& ws_k, double& ws_rewire, std::size_t& ba_m,
                     std::size_t& rr_degree, std::string& features,
                     double& bernoulli_p) {
  cmd->add_option("--model", model, "graph model")
      ->check(CLI::IsMember({"ws", "ba", "rr"}));
  cmd->add_option("--n", n, "number of nodes");
  cmd->add_option("--ws-k", ws_k, "ring-lattice neighbors (ws)");
  cmd->add_option("--ws-rewire", ws_rewire, "rewiring probability (ws)");
  cmd->add_option("--ba-m", ba_m, "edges per new node (ba)");
  cmd->add_option("--rr-degree", rr_degree, "node degree (rr)");
  cmd->add_option("--features", features, "node feature distribution")
      ->check(CLI::IsMember({"none", "normal", "bernoulli"}));
  cmd->add_option("--bernoulli-p", bernoulli_p, "success probability");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gromov-Wasserstein lower bounds for metric measure spaces"};
  app.set_version_flag("--version", std::string(gwb::kVersion));
  app.require_subcommand(1);

  gwbcli::DistOptions dist;
  auto* dist_cmd = app.add_subcommand(
      "dist", "pairwise lower-bound matrix over input spaces");
  add_common(dist_cmd, dist.common);
  add_bound_flags(dist_cmd, dist.bound, true);
  dist_cmd->add_option("inputs", dist.inputs, "space files (.json or .csv)")
      ->required();

  gwbcli::KnnOptions knn;
  auto* knn_cmd = app.add_subcommand(
      "knn", "k-nearest-neighbor classification from a distance matrix");
  add_common(knn_cmd, knn.common);
  knn_cmd->add_option("--matrix", knn.matrix_path, "distance matrix csv")
      ->required();
  knn_cmd->add_option("--labels", knn.labels_path, "label csv, one per row")
      ->required();
  knn_cmd->add_option("--k", knn.k, "number of neighbors");
  knn_cmd->add_option("--splits", knn.splits, "random train/test splits");
  knn_cmd->add_option("--train-frac", knn.train_frac, "training fraction");

  gwbcli::IsotestOptions iso;
  auto* iso_cmd = app.add_subcommand(
      "isotest", "isomorphism detection accuracy on random graph pairs");
  add_common(iso_cmd, iso.common);
  add_bound_flags(iso_cmd, iso.bound, false);
  add_model_flags(iso_cmd, iso.model, iso.n, iso.ws_k, iso.ws_rewire, iso.ba_m,
                  iso.rr_degree, iso.features, iso.bernoulli_p);
  iso_cmd->add_option("--pairs", iso.pairs, "graph pairs per repeat (even)");
  iso_cmd->add_option("--repeats", iso.repeats, "independent repeats");
  iso_cmd->add_option("--bounds", iso.bounds,
                      "bounds/tests to evaluate (may include wl-d, wl-f)");
  iso_cmd->add_option("--wl-iterations", iso.wl_iterations,
                      "refinement rounds for wl-d/wl-f");
  iso_cmd->add_option("--wl-bins", iso.wl_bins, "feature bins for wl-f");
  iso_cmd->add_flag("--all-isomorphic", iso.all_isomorphic,
                    "make every pair a relabeled copy");

  gwbcli::BenchOptions bench;
  auto* bench_cmd =
      app.add_subcommand("bench", "wall-time scaling across input sizes");
  add_common(bench_cmd, bench.common);
  add_bound_flags(bench_cmd, bench.bound, false);
  bench_cmd->add_option("--sizes", bench.sizes, "input sizes n")->required();
  bench_cmd->add_option("--repeats", bench.repeats, "instances per size");
  bench_cmd->add_option("--bounds", bench.bounds, "bounds to time");
  bench_cmd->add_option("--dim", bench.dim, "point dimension");

  gwbcli::BaryOptions bary;
  auto* bary_cmd = app.add_subcommand(
      "bary", "free-support barycenter by lower-bound gradient descent");
  add_common(bary_cmd, bary.common);
  bary_cmd->add_option("targets", bary.targets, "target space files")
      ->required();
  bary_cmd->add_option("--distance", bary.distance, "loss: tlb or stlb")
      ->check(CLI::IsMember({"tlb", "stlb"}));
  bary_cmd->add_option("--n-points", bary.n_points, "support size");
  bary_cmd->add_option("--dim", bary.dim, "support dimension");
  bary_cmd->add_option("--steps", bary.steps, "gradient steps");
  bary_cmd->add_option("--step-size", bary.step_size, "gradient step size");
  bary_cmd->add_option("--restarts", bary.restarts, "random restarts");
  bary_cmd->add_option("--r", bary.r, "quadrature size (stlb)");
  bary_cmd->add_option("--L", bary.num_projections, "projections (stlb)");
  bary_cmd->add_option("--warm-start", bary.warm_start_path,
                       "initial support csv (rows x dim)");

  auto* gen_cmd = app.add_subcommand("gen", "write synthetic inputs");
  gen_cmd->require_subcommand(1);

  gwbcli::GenShapeOptions shape;
  auto* shape_cmd = gen_cmd->add_subcommand("shape", "one 2D contour space");
  shape_cmd->add_option("--seed", shape.common.seed, "RNG seed");
  shape_cmd->add_option("--kind", shape.kind, "contour kind")
      ->check(CLI::IsMember({"ring", "ellipse", "star", "cross"}));
  shape_cmd->add_option("--n", shape.n, "points on the contour");
  shape_cmd->add_option("--jitter", shape.jitter, "coordinate noise scale");
  shape_cmd->add_option("--out", shape.out_path, "space json path")->required();
  shape_cmd->add_option("--points", shape.points_path,
                        "also write raw coordinates csv here");

  gwbcli::GenGraphOptions graph;
  auto* graph_cmd = gen_cmd->add_subcommand("graph", "one random graph");
  graph_cmd->add_option("--seed", graph.common.seed, "RNG seed");
  add_model_flags(graph_cmd, graph.model, graph.n, graph.ws_k, graph.ws_rewire,
                  graph.ba_m, graph.rr_degree, graph.features,
                  graph.bernoulli_p);
  graph_cmd->add_option("--out", graph.out_path, "graph json path")->required();
  graph_cmd->add_option("--space", graph.space_path,
                        "also write the hop-metric space json here");
  graph_cmd->add_flag("--largest-component", graph.largest_component,
                      "restrict the space to the largest component");

  gwbcli::GenShapesetOptions shapeset;
  auto* shapeset_cmd =
      gen_cmd->add_subcommand("shapes", "labeled 4-class contour corpus");
  shapeset_cmd->add_option("--seed", shapeset.common.seed, "RNG seed");
  shapeset_cmd->add_option("--out", shapeset.common.out_dir, "output directory");
  shapeset_cmd->add_option("--per-class", shapeset.per_class,
                           "spaces per class");
  shapeset_cmd->add_option("--n", shapeset.n, "points per contour");
  shapeset_cmd->add_option("--jitter", shapeset.jitter,
                           "coordinate noise scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string cmdline = joined_command_line(argc, argv);
  try {
    if (dist_cmd->parsed()) {
      dist.common.command_line = cmdline;
      return gwbcli::run_dist(dist);
    }
    if (knn_cmd->parsed()) {
      knn.common.command_line = cmdline;
      return gwbcli::run_knn(knn);
    }
    if (iso_cmd->parsed()) {
      iso.common.command_line = cmdline;
      return gwbcli::run_isotest(iso);
    }
    if (bench_cmd->parsed()) {
      bench.common.command_line = cmdline;
      return gwbcli::run_bench(bench);
    }
    if (bary_cmd->parsed()) {
      bary.common.command_line = cmdline;
      return gwbcli::run_bary(bary);
    }
    if (gen_cmd->parsed()) {
      if (shape_cmd->parsed()) {
        shape.common.command_line = cmdline;
        return gwbcli::run_gen_shape(shape);
      }
      if (graph_cmd->parsed()) {
        graph.common.command_line = cmdline;
        return gwbcli::run_gen_graph(graph);
      }
      shapeset.common.command_line = cmdline;
      return gwbcli::run_gen_shapeset(shapeset);
    }
  } catch (const gwb::io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const gwb::solver_error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const gwb::validation_error& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

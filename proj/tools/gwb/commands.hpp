#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gwbcli {

struct CommonOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
  std::string command_line;    // reconstructed argv, echoed into manifests
};

struct BoundFlags {
  std::string bound = "stlb";
  double p = 2.0;
  double alpha = 0.5;
  std::size_t r = 0;  // 0 = automatic rule
  std::size_t num_projections = 100;
  std::string solver = "exact";  // exact | sinkhorn
  double epsilon = 1e-3;
};

struct DistOptions {
  CommonOptions common;
  BoundFlags bound;
  std::vector<std::string> inputs;
};

struct KnnOptions {
  CommonOptions common;
  std::string matrix_path;
  std::string labels_path;
  std::size_t k = 3;
  std::size_t splits = 100;
  double train_frac = 0.25;
};

struct IsotestOptions {
  CommonOptions common;
  BoundFlags bound;  // r/L/alpha/solver knobs for the bound list
  std::string model = "ws";
  std::size_t n = 10;
  std::size_t ws_k = 4;
  double ws_rewire = 0.1;
  std::size_t ba_m = 2;
  std::size_t rr_degree = 3;
  std::string features = "none";  // none | normal | bernoulli
  double bernoulli_p = 0.5;
  std::size_t pairs = 200;
  std::size_t repeats = 5;
  std::vector<std::string> bounds = {"stlb"};
  std::size_t wl_iterations = 5;
  std::size_t wl_bins = 10;
  bool all_isomorphic = false;
};

struct BenchOptions {
  CommonOptions common;
  BoundFlags bound;
  std::vector<std::size_t> sizes;
  std::size_t repeats = 5;
  std::vector<std::string> bounds = {"ftlb", "sftlb"};
  std::size_t dim = 2;
};

struct BaryOptions {
  CommonOptions common;
  std::vector<std::string> targets;
  std::string distance = "tlb";
  std::size_t n_points = 50;
  std::size_t dim = 2;
  std::size_t steps = 1000;
  double step_size = 0.1;
  std::size_t restarts = 3;
  std::size_t r = 100;
  std::size_t num_projections = 100;
  std::string warm_start_path;
};

struct GenShapeOptions {
  CommonOptions common;
  std::string kind = "ring";
  std::size_t n = 50;
  double jitter = 0.02;
  std::string out_path = "shape.json";
  std::string points_path;  // optional raw-point CSV
};

struct GenGraphOptions {
  CommonOptions common;
  std::string model = "ws";
  std::size_t n = 10;
  std::size_t ws_k = 4;
  double ws_rewire = 0.1;
  std::size_t ba_m = 2;
  std::size_t rr_degree = 3;
  std::string features = "none";
  double bernoulli_p = 0.5;
  std::string out_path = "graph.json";
  std::string space_path;  // optional hop-metric space JSON
  bool largest_component = false;
};

struct GenShapesetOptions {
  CommonOptions common;
  std::size_t per_class = 25;
  std::size_t n = 50;
  double jitter = 0.02;
};

int run_dist(const DistOptions& o);
int run_knn(const KnnOptions& o);
int run_isotest(const IsotestOptions& o);
int run_bench(const BenchOptions& o);
int run_bary(const BaryOptions& o);
int run_gen_shape(const GenShapeOptions& o);
int run_gen_graph(const GenGraphOptions& o);
int run_gen_shapeset(const GenShapesetOptions& o);

}  // namespace gwbcli

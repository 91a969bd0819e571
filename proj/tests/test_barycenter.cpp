#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gwb/gwb.hpp"
#include "oracles.hpp"

using gwb::BarycenterConfig;
using gwb::BaryDistance;
using gwb::Matrix;
using gwb::MmSpace;

TEST(W2sqCoupled, ReproducesTheMergeAndItsCost) {
  gwb::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.uniform_below(6);
    const std::size_t m = 2 + rng.uniform_below(6);
    std::vector<double> av(n), bv(m);
    for (double& v : av) v = rng.normal();
    for (double& v : bv) v = rng.normal();
    const std::vector<double> aw = testutil::random_weights(rng, n);
    const std::vector<double> bw = testutil::random_weights(rng, m);
    const gwb::SortedRow a = gwb::sorted_row(av, aw);
    const gwb::SortedRow b = gwb::sorted_row(bv, bw);

    double mass_sum = 0.0, rebuilt = 0.0;
    const double total = gwb::detail::w2sq_coupled(
        a, b, [&](std::size_t, std::size_t, double mass, double diff) {
          mass_sum += mass;
          rebuilt += mass * (diff * diff);
        });
    EXPECT_EQ(total, gwb::detail::wasserstein_1d_pp_sorted(a, b, 2.0));
    EXPECT_EQ(rebuilt, total);
    EXPECT_NEAR(mass_sum, 1.0, 1e-12);
  }
}

TEST(Gradient, FiniteDifferencesAgreeOnTheTlbPath) {
  gwb::Rng rng(17);
  BarycenterConfig cfg;
  cfg.distance = BaryDistance::tlb;
  const double h = 1e-5;
  int evaluated = 0;
  for (int t = 0; t < 8 && evaluated < 5; ++t) {
    const Matrix points = testutil::random_points(rng, 6, 2);
    std::vector<MmSpace> targets{testutil::random_space(rng, 5),
                                 testutil::random_space(rng, 7)};
    const auto check = testutil::fd_gradient_check(points, targets, cfg, nullptr, h);
    if (check.skipped) continue;
    ++evaluated;
    EXPECT_LT(check.rel_error, 1e-3) << "instance " << t;
  }
  EXPECT_GE(evaluated, 3);
}

TEST(Gradient, FiniteDifferencesAgreeOnTheStlbPath) {
  gwb::Rng rng(19);
  BarycenterConfig cfg;
  cfg.distance = BaryDistance::stlb;
  cfg.r = 6;
  cfg.num_projections = 40;
  const gwb::ProjectionSet proj = gwb::sample_directions(77, cfg.num_projections, cfg.r);
  const double h = 1e-5;
  int evaluated = 0;
  for (int t = 0; t < 8 && evaluated < 5; ++t) {
    const Matrix points = testutil::random_points(rng, 6, 2);
    std::vector<MmSpace> targets{testutil::random_space(rng, 6)};
    const auto check = testutil::fd_gradient_check(points, targets, cfg, &proj, h);
    if (check.skipped) continue;
    ++evaluated;
    EXPECT_LT(check.rel_error, 1e-3) << "instance " << t;
  }
  EXPECT_GE(evaluated, 3);
}

TEST(Solve, DescentDecreasesTheLoss) {
  gwb::Rng rng(29);
  std::vector<MmSpace> targets{testutil::random_space(rng, 8),
                               testutil::random_space(rng, 8)};
  BarycenterConfig cfg;
  cfg.n_points = 8;
  cfg.dim = 2;
  cfg.steps = 40;
  cfg.step_size = 0.02;
  cfg.restarts = 1;
  cfg.seed = 5;
  const auto result = gwb::solve(targets, cfg);
  ASSERT_EQ(result.loss_trace.size(), cfg.steps + 1);
  EXPECT_LT(result.loss_trace.back(), result.loss_trace.front());
  EXPECT_DOUBLE_EQ(result.final_losses[0], result.loss_trace.back());

  cfg.distance = BaryDistance::stlb;
  cfg.r = 8;
  cfg.num_projections = 50;
  cfg.steps = 20;
  const auto sliced = gwb::solve(targets, cfg);
  EXPECT_LT(sliced.loss_trace.back(), sliced.loss_trace.front());
}

TEST(Solve, DuplicateTargetWithHalvedStepTracksExactly) {
  gwb::Rng rng(31);
  const MmSpace target = testutil::random_space(rng, 7);
  const Matrix init = testutil::random_points(rng, 7, 2);
  BarycenterConfig cfg;
  cfg.n_points = 7;
  cfg.dim = 2;
  cfg.steps = 15;
  cfg.restarts = 1;
  cfg.warm_start = init;

  cfg.step_size = 0.05;
  std::vector<MmSpace> one{target};
  const auto a = gwb::solve(one, cfg);

  cfg.step_size = 0.025;  // doubled gradient, halved step: identical iterates
  std::vector<MmSpace> two{target, target};
  const auto b = gwb::solve(two, cfg);

  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(a.points(i, c), b.points(i, c));
}

TEST(Solve, BestRestartMinimizesTheFinalLoss) {
  gwb::Rng rng(37);
  std::vector<MmSpace> targets{testutil::random_space(rng, 6)};
  BarycenterConfig cfg;
  cfg.n_points = 6;
  cfg.dim = 2;
  cfg.steps = 10;
  cfg.step_size = 0.02;
  cfg.restarts = 3;
  cfg.seed = 11;
  const auto result = gwb::solve(targets, cfg);
  ASSERT_EQ(result.final_losses.size(), 3u);
  const std::size_t argmin =
      std::min_element(result.final_losses.begin(), result.final_losses.end()) -
      result.final_losses.begin();
  EXPECT_EQ(result.best_restart, argmin);
  EXPECT_TRUE(std::isfinite(result.final_losses[result.best_restart]));
}

TEST(Solve, DivergentStepAbortsEveryRestart) {
  gwb::Rng rng(41);
  std::vector<MmSpace> targets{testutil::random_space(rng, 6)};
  BarycenterConfig cfg;
  cfg.n_points = 6;
  cfg.dim = 2;
  cfg.steps = 10;
  cfg.step_size = 1e8;
  cfg.restarts = 2;
  EXPECT_THROW(gwb::solve(targets, cfg), gwb::solver_error);
}

TEST(Solve, WarmStartAtTheTargetIsAFixedPoint) {
  gwb::Rng rng(43);
  const Matrix pts = testutil::random_points(rng, 8, 2);
  const MmSpace target = gwb::mm_from_point_cloud(gwb::PointCloud(pts));
  BarycenterConfig cfg;
  cfg.n_points = 8;
  cfg.dim = 2;
  cfg.steps = 3;
  cfg.step_size = 0.1;
  cfg.restarts = 1;
  cfg.warm_start = pts;
  std::vector<MmSpace> targets{target};
  const auto result = gwb::solve(targets, cfg);
  EXPECT_LT(result.final_losses[0], 1e-6);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(result.points(i, c), pts(i, c));
}

TEST(Solve, RejectsBadConfigurations) {
  gwb::Rng rng(47);
  std::vector<MmSpace> targets{testutil::random_space(rng, 5)};
  BarycenterConfig cfg;
  cfg.n_points = 5;
  cfg.steps = 0;
  EXPECT_THROW(gwb::solve(targets, cfg), std::domain_error);
  cfg.steps = 5;
  cfg.warm_start = Matrix(4, 3);  // wrong shape for n_points x dim
  EXPECT_THROW(gwb::solve(targets, cfg), gwb::validation_error);

  const MmSpace weighted = testutil::random_weighted_space(rng, 5);
  const Matrix points = testutil::random_points(rng, 5, 2);
  std::vector<MmSpace> bad{weighted};
  BarycenterConfig plain;
  EXPECT_THROW(gwb::loss_and_gradient(points, bad, plain), gwb::validation_error);
  EXPECT_THROW(gwb::loss_and_gradient(points, {}, plain), std::domain_error);
}

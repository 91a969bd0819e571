#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gwb/gwb.hpp"
#include "oracles.hpp"

using gwb::Matrix;

TEST(Wasserstein1d, TwoAtomBasics) {
  const std::vector<double> u{1.0, 1.0};
  const std::vector<double> v01{0.0, 1.0}, v12{1.0, 2.0}, v34{3.0, 4.0};
  const std::vector<double> v00{0.0, 0.0}, v11{1.0, 1.0};
  EXPECT_EQ(gwb::wasserstein_1d_pp(v01, u, v01, u, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(gwb::wasserstein_1d_pp(v12, u, v34, u, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(gwb::wasserstein_1d(v00, u, v11, u, 3.0), 1.0);
}

// Reference values from an independent quantile-integral implementation.
TEST(Wasserstein1d, FrozenWeightedInstance) {
  const std::vector<double> xv{0.2, -1.1, 0.7, 1.9}, xw{0.1, 0.4, 0.3, 0.2};
  const std::vector<double> yv{-0.5, 0.33, 2.4}, yw{0.5, 0.2, 0.3};
  EXPECT_NEAR(gwb::wasserstein_1d_pp(xv, xw, yv, yw, 1.0), 0.65400000000000014,
              1e-12);
  EXPECT_NEAR(gwb::wasserstein_1d_pp(xv, xw, yv, yw, 2.0), 0.55938000000000021,
              1e-12);
  EXPECT_NEAR(gwb::wasserstein_1d_pp(xv, xw, yv, yw, 3.0), 0.64713060000000044,
              1e-12);
}

TEST(Wasserstein1d, SymmetricBitwise) {
  gwb::Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.uniform_below(9);
    const std::size_t m = 2 + rng.uniform_below(9);
    std::vector<double> xv(n), yv(m);
    for (double& v : xv) v = rng.normal();
    for (double& v : yv) v = rng.normal();
    const auto xw = testutil::random_weights(rng, n);
    const auto yw = testutil::random_weights(rng, m);
    const double p = (t % 3 == 0) ? 1.0 : (t % 3 == 1) ? 2.0 : 3.0;
    EXPECT_EQ(gwb::wasserstein_1d_pp(xv, xw, yv, yw, p),
              gwb::wasserstein_1d_pp(yv, yw, xv, xw, p));
  }
}

TEST(Wasserstein1d, ZeroMassAtomsIgnored) {
  const std::vector<double> xv{0.0, 5.0}, xw{1.0, 0.0};
  const std::vector<double> yv{1.0}, yw{2.0};  // normalized internally
  EXPECT_DOUBLE_EQ(gwb::wasserstein_1d_pp(xv, xw, yv, yw, 2.0), 1.0);
}

TEST(Wasserstein1d, RejectsBadInput) {
  const std::vector<double> v{0.0, 1.0}, w{0.5, 0.5};
  const std::vector<double> short_w{0.5};
  const std::vector<double> neg_w{-0.1, 1.1};
  const std::vector<double> zero_w{0.0, 0.0};
  EXPECT_THROW(gwb::wasserstein_1d_pp(v, w, v, w, 0.5), std::domain_error);
  EXPECT_THROW(gwb::wasserstein_1d_pp(v, short_w, v, w, 2.0),
               gwb::validation_error);
  EXPECT_THROW(gwb::wasserstein_1d_pp(v, neg_w, v, w, 2.0),
               gwb::validation_error);
  EXPECT_THROW(gwb::wasserstein_1d_pp(v, zero_w, v, w, 2.0),
               gwb::validation_error);
}

// Frozen 5x5 assignment instance; optimal permutation (2,1,4,0,3) from an
// independent assignment solver.
TEST(Assignment, FrozenFiveByFive) {
  const Matrix c = Matrix::from_rows({{0.31, 0.82, 0.19, 0.55, 0.76},
                                      {0.44, 0.12, 0.98, 0.37, 0.61},
                                      {0.73, 0.58, 0.24, 0.89, 0.15},
                                      {0.09, 0.67, 0.52, 0.28, 0.93},
                                      {0.85, 0.41, 0.77, 0.13, 0.49}});
  const std::vector<double> u(5, 0.2);
  const gwb::TransportPlan plan = gwb::solve_ot(c, u, u);
  EXPECT_NEAR(plan.cost, 0.13599999999999998, 1e-12);
  const std::size_t perm[5] = {2, 1, 4, 0, 3};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(plan.plan(i, perm[i]), 0.2);
  EXPECT_LT(plan.marginal_error, 1e-12);
}

TEST(Assignment, MatchesPermutationOracle) {
  gwb::Rng rng(33);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.uniform_below(6);
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = rng.uniform();
    const std::vector<double> u(n, 1.0 / static_cast<double>(n));
    const gwb::TransportPlan plan = gwb::solve_ot(c, u, u);
    EXPECT_NEAR(plan.cost, testutil::perm_ot_cost(c), 1e-10);
  }
}

// Frozen general-marginal instance; reference cost 0.98 from an LP solver.
TEST(Transport, FrozenGeneralInstance) {
  const Matrix c = Matrix::from_rows({{0.0, 1.2, 3.1, 0.7, 2.2},
                                      {1.5, 0.3, 2.0, 1.1, 0.9},
                                      {2.8, 1.7, 0.4, 2.6, 1.3},
                                      {0.9, 2.4, 1.8, 0.2, 3.0}});
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> b{0.15, 0.25, 0.2, 0.1, 0.3};
  const gwb::TransportPlan plan = gwb::solve_transport(c, a, b);
  EXPECT_NEAR(plan.cost, 0.98, 1e-10);
  EXPECT_LT(plan.marginal_error, 1e-12);
}

TEST(Transport, UniformSquareMatchesPermutationOracle) {
  gwb::Rng rng(44);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.uniform_below(6);
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = rng.uniform();
    const std::vector<double> u(n, 1.0 / static_cast<double>(n));
    // exercise the simplex directly, bypassing the assignment fast path
    const gwb::TransportPlan plan = gwb::solve_transport(c, u, u);
    EXPECT_NEAR(plan.cost, testutil::perm_ot_cost(c), 1e-10);
  }
}

TEST(Transport, OneDimensionalCostsMatchClosedForm) {
  gwb::Rng rng(55);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + rng.uniform_below(8);
    const std::size_t m = 2 + rng.uniform_below(8);
    std::vector<double> xv(n), yv(m);
    for (double& v : xv) v = rng.normal();
    for (double& v : yv) v = rng.normal();
    const auto a = testutil::random_weights(rng, n);
    const auto b = testutil::random_weights(rng, m);
    const double p = (t % 3 == 0) ? 1.0 : (t % 3 == 1) ? 2.0 : 3.0;
    Matrix c(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        c(i, j) = std::pow(std::fabs(xv[i] - yv[j]), p);
    const gwb::TransportPlan plan = gwb::solve_ot(c, a, b);
    EXPECT_NEAR(plan.cost, gwb::wasserstein_1d_pp(xv, a, yv, b, p), 1e-9);
  }
}

TEST(Transport, ExactMarginals) {
  gwb::Rng rng(66);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.uniform_below(8);
    const std::size_t m = 2 + rng.uniform_below(8);
    Matrix c(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) c(i, j) = rng.uniform();
    const auto a = testutil::random_weights(rng, n);
    const auto b = testutil::random_weights(rng, m);
    const gwb::TransportPlan plan = gwb::solve_ot(c, a, b);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        EXPECT_GE(plan.plan(i, j), 0.0);
        row += plan.plan(i, j);
      }
      EXPECT_NEAR(row, a[i], 1e-12);
    }
    for (std::size_t j = 0; j < m; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += plan.plan(i, j);
      EXPECT_NEAR(col, b[j], 1e-12);
    }
  }
}

TEST(Transport, RejectsMismatchedMass) {
  const Matrix c(2, 2, 1.0);
  const std::vector<double> half{0.5, 0.5};
  const std::vector<double> heavy{0.7, 0.5};
  const std::vector<double> negative{0.5, -0.5};
  EXPECT_THROW(gwb::solve_transport(c, half, heavy), gwb::validation_error);
  EXPECT_THROW(gwb::solve_transport(c, negative, half), gwb::validation_error);
}

TEST(Sinkhorn, CloseToExactWithSmallEpsilon) {
  gwb::Rng rng(77);
  for (int t = 0; t < 5; ++t) {
    const std::size_t n = 3 + rng.uniform_below(5);
    const std::size_t m = 3 + rng.uniform_below(5);
    Matrix c(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) c(i, j) = rng.uniform();
    const auto a = testutil::random_weights(rng, n);
    const auto b = testutil::random_weights(rng, m);
    const double exact = gwb::solve_ot(c, a, b).cost;
    gwb::SinkhornOptions opt;
    opt.epsilon = 5e-3;  // unit-scale costs: keeps the fixed point reachable
    opt.max_iter = 100000;
    const gwb::TransportPlan sk = gwb::sinkhorn(c, a, b, opt);
    EXPECT_TRUE(sk.converged);
    EXPECT_LT(sk.marginal_error, opt.tol * 10);
    EXPECT_NEAR(sk.cost, exact, 0.05);
    EXPECT_GE(sk.cost, exact - 1e-8);  // near-feasible plan cannot beat the optimum
  }
}

TEST(Sinkhorn, ReportsNonConvergence) {
  const Matrix c = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  gwb::SinkhornOptions opt;
  opt.max_iter = 1;
  opt.epsilon = 1e-6;
  const std::vector<double> a{0.9, 0.1}, b{0.1, 0.9};
  const gwb::TransportPlan plan = gwb::sinkhorn(c, a, b, opt);
  EXPECT_FALSE(plan.converged);
}

TEST(CostMatrix, SquaredEuclidean) {
  const Matrix x = Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}});
  const Matrix y = Matrix::from_rows({{1.0, 0.0}});
  const Matrix c = gwb::cost_matrix_sqeuclidean(x, y);
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 1.0);
}

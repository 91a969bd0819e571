#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gwb/gwb.hpp"
#include "oracles.hpp"

using gwb::Matrix;

TEST(QuadratureRule, MidpointKnotsAndWeights) {
  const gwb::QuadratureRule rule = gwb::midpoint_rule(4);
  const double expected[4] = {0.125, 0.375, 0.625, 0.875};
  ASSERT_EQ(rule.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(rule.knots[k], expected[k]);
    EXPECT_DOUBLE_EQ(rule.weights[k], 0.25);
  }
  EXPECT_THROW(gwb::midpoint_rule(0), std::domain_error);
}

TEST(QuadratureRule, RejectsBadKnots) {
  EXPECT_THROW(gwb::QuadratureRule({0.2, 0.2}, {0.5, 0.5}), std::domain_error);
  EXPECT_THROW(gwb::QuadratureRule({0.0, 0.5}, {0.5, 0.5}), std::domain_error);
  EXPECT_THROW(gwb::QuadratureRule({0.5, 1.0}, {0.5, 0.5}), std::domain_error);
}

TEST(QuadratureRule, NonequispacedMergesBreakpoints) {
  const std::vector<double> a{0.5, 0.5};
  const std::vector<double> b{0.25, 0.75};
  const gwb::QuadratureRule rule = gwb::nonequispaced_midpoint_rule(a, b);
  // cuts at 0.25 and 0.5 -> intervals (0,.25), (.25,.5), (.5,1)
  ASSERT_EQ(rule.size(), 3u);
  EXPECT_DOUBLE_EQ(rule.knots[0], 0.125);
  EXPECT_DOUBLE_EQ(rule.knots[1], 0.375);
  EXPECT_DOUBLE_EQ(rule.knots[2], 0.75);
  EXPECT_DOUBLE_EQ(rule.weights[0], 0.25);
  EXPECT_DOUBLE_EQ(rule.weights[1], 0.25);
  EXPECT_DOUBLE_EQ(rule.weights[2], 0.5);
}

TEST(WeightedQuantile, StrictExceedanceConvention) {
  const std::vector<double> values{1.0, 2.0, 3.0};
  const std::vector<double> weights{0.25, 0.5, 0.25};
  EXPECT_DOUBLE_EQ(gwb::weighted_quantile(values, weights, 0.125), 1.0);
  EXPECT_DOUBLE_EQ(gwb::weighted_quantile(values, weights, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(gwb::weighted_quantile(values, weights, 0.7), 2.0);
  EXPECT_DOUBLE_EQ(gwb::weighted_quantile(values, weights, 0.75), 3.0);
  EXPECT_DOUBLE_EQ(gwb::weighted_quantile(values, weights, 0.99), 3.0);
  EXPECT_THROW(gwb::weighted_quantile(values, weights, 0.0), std::domain_error);
  EXPECT_THROW(gwb::weighted_quantile(values, weights, 1.0), std::domain_error);
}

TEST(SortedRow, StableSortTracksOrder) {
  const std::vector<double> values{3.0, 1.0, 2.0, 1.0};
  const std::vector<double> weights{0.1, 0.2, 0.3, 0.4};
  const gwb::SortedRow row = gwb::sorted_row(values, weights);
  const double sorted[4] = {1.0, 1.0, 2.0, 3.0};
  const std::size_t order[4] = {1, 3, 2, 0};  // ties keep input order
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(row.values[k], sorted[k]);
    EXPECT_EQ(row.order[k], order[k]);
  }
  EXPECT_DOUBLE_EQ(row.cumw.back(), 1.0);
}

TEST(RowQuantiles, MatchesScalarQuantiles) {
  gwb::Rng rng(13);
  std::vector<double> values(9), out(5);
  for (double& v : values) v = rng.normal();
  const auto weights = testutil::random_weights(rng, values.size());
  const gwb::SortedRow row = gwb::sorted_row(values, weights);
  const gwb::QuadratureRule rule = gwb::midpoint_rule(5);
  std::vector<std::size_t> picks(5);
  gwb::row_quantiles(row, rule.knots, out, &picks);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(out[k], gwb::weighted_quantile(values, weights, rule.knots[k]));
    EXPECT_EQ(row.values[picks[k]], out[k]);
  }
}

TEST(Embedding, UniformTwoAtomRow) {
  // distances 0 and 1 seen from each point; midpoint r=2 picks both atoms
  const Matrix d = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const gwb::MmSpace s{d};
  const gwb::QuantileEmbedding e = gwb::embed(s, gwb::midpoint_rule(2));
  const double scale = std::sqrt(0.5);
  ASSERT_EQ(e.points.rows(), 2u);
  ASSERT_EQ(e.points.cols(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(e.points(i, 0), 0.0);
    EXPECT_DOUBLE_EQ(e.points(i, 1), scale * 1.0);
  }
}

TEST(Embedding, FuseScalesBlocks) {
  const Matrix d = Matrix::from_rows({{0.0, 2.0}, {2.0, 0.0}});
  const gwb::MmSpace s{d};
  const gwb::QuantileEmbedding e = gwb::embed(s, gwb::midpoint_rule(2));
  const Matrix f = Matrix::from_rows({{3.0}, {-1.0}});
  const double alpha = 0.25;
  const gwb::FusedEmbedding fused = gwb::fuse(e, f, alpha);
  ASSERT_EQ(fused.points.cols(), 3u);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 2; ++k)
      EXPECT_DOUBLE_EQ(fused.points(i, k),
                       std::sqrt(1.0 - alpha) * e.points(i, k));
    EXPECT_DOUBLE_EQ(fused.points(i, 2), std::sqrt(alpha) * f(i, 0));
  }
  EXPECT_THROW(gwb::fuse(e, f, 1.5), std::domain_error);
  EXPECT_THROW(gwb::fuse(e, Matrix(3, 1, 0.0), 0.5), gwb::validation_error);
}

// Embedding distances reproduce the 1D transport costs exactly in the
// uniform equal-size midpoint regime: W_2^2 of two n-atom uniform rows
// equals the squared Euclidean distance of their r=n signatures.
TEST(Embedding, MidpointExactnessForUniformRows) {
  gwb::Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 3 + rng.uniform_below(8);
    const gwb::MmSpace x = testutil::random_space(rng, n);
    const gwb::MmSpace y = testutil::random_space(rng, n);
    const gwb::QuadratureRule rule = gwb::midpoint_rule(n);
    const gwb::QuantileEmbedding ex = gwb::embed(x, rule);
    const gwb::QuantileEmbedding ey = gwb::embed(y, rule);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double emb = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double d = ex.points(i, k) - ey.points(j, k);
          emb += d * d;
        }
        std::vector<double> xi(n), yj(n);
        for (std::size_t k = 0; k < n; ++k) {
          xi[k] = x.distances(i, k);
          yj[k] = y.distances(j, k);
        }
        const double direct =
            gwb::wasserstein_1d_pp(xi, x.weights, yj, y.weights, 2.0);
        EXPECT_NEAR(emb, direct, 1e-12);
      }
  }
}

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gwb/gwb.hpp"
#include "oracles.hpp"

using gwb::Matrix;
using gwb::MmSpace;

namespace {

Matrix valid_triangle() {
  return Matrix::from_rows({{0.0, 1.0, 2.0}, {1.0, 0.0, 1.5}, {2.0, 1.5, 0.0}});
}

}  // namespace

TEST(MmSpace, DefaultsToUniformWeights) {
  const MmSpace s(valid_triangle());
  ASSERT_EQ(s.size(), 3u);
  for (double w : s.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
}

TEST(MmSpace, RenormalizesNearlyNormalizedWeights) {
  const MmSpace s(valid_triangle(), {0.2, 0.3, 0.5 + 1e-8});
  double sum = 0.0;
  for (double w : s.weights) sum += w;
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(MmSpace, RejectsInvalidInput) {
  auto expect_code = [](Matrix d, std::vector<double> w, gwb::errc code) {
    try {
      MmSpace s(std::move(d), std::move(w));
      FAIL() << "expected validation_error " << gwb::to_string(code);
    } catch (const gwb::validation_error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  expect_code(Matrix(2, 3, 0.0), {}, gwb::errc::not_square);
  expect_code(Matrix::from_rows({{0.0, 1.0}, {2.0, 0.0}}), {},
              gwb::errc::asymmetric);
  expect_code(Matrix::from_rows({{0.5, 1.0}, {1.0, 0.0}}), {},
              gwb::errc::nonzero_diagonal);
  expect_code(Matrix::from_rows({{0.0, -1.0}, {-1.0, 0.0}}), {},
              gwb::errc::negative_entry);
  const double inf = std::numeric_limits<double>::infinity();
  expect_code(Matrix::from_rows({{0.0, inf}, {inf, 0.0}}), {},
              gwb::errc::non_finite);
  expect_code(valid_triangle(), {0.1, 0.1, 0.1}, gwb::errc::weight_sum);
  expect_code(valid_triangle(), {-0.2, 0.6, 0.6}, gwb::errc::weight_sum);
  expect_code(valid_triangle(), {0.5, 0.5}, gwb::errc::dimension_mismatch);
}

TEST(Validate, StrictModeChecksTriangle) {
  const MmSpace good(valid_triangle());
  EXPECT_NO_THROW(gwb::validate(good, true));
  const MmSpace bad(
      Matrix::from_rows({{0.0, 1.0, 5.0}, {1.0, 0.0, 1.0}, {5.0, 1.0, 0.0}}));
  EXPECT_NO_THROW(gwb::validate(bad, false));
  try {
    gwb::validate(bad, true);
    FAIL() << "expected triangle violation";
  } catch (const gwb::validation_error& e) {
    EXPECT_EQ(e.code(), gwb::errc::triangle_violation);
  }
}

TEST(StructuredSpace, ChecksFeatureRows) {
  EXPECT_THROW(gwb::StructuredSpace(MmSpace(valid_triangle()), Matrix(2, 1, 0.0)),
               gwb::validation_error);
  const gwb::StructuredSpace ok(MmSpace(valid_triangle()), Matrix(3, 2, 0.5));
  EXPECT_EQ(ok.features.cols(), 2u);
}

TEST(PointCloud, EuclideanDistances) {
  const Matrix pts = Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}, {3.0, 0.0}});
  const MmSpace s = gwb::mm_from_point_cloud(gwb::PointCloud(pts));
  EXPECT_DOUBLE_EQ(s.distances(0, 1), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(s.distances(0, 2), 3.0);
  EXPECT_EQ(s.distances(1, 2), s.distances(2, 1));
  EXPECT_EQ(s.distances(1, 1), 0.0);
  EXPECT_NO_THROW(gwb::validate(s, true));
}

TEST(Matrix, TreeSumMatchesSerialOnTotal) {
  std::vector<double> v(1000);
  gwb::Rng rng(3);
  for (double& x : v) x = rng.uniform();
  double serial = 0.0;
  for (double x : v) serial += x;
  EXPECT_NEAR(gwb::tree_sum(v), serial, 1e-12);
}

TEST(Io, CsvRoundTripIsExact) {
  gwb::Rng rng(9);
  Matrix m(7, 5);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rng.normal() * 1e3;
  const std::string path = "tmp_roundtrip.csv";
  gwb::write_csv_matrix(path, m);
  const Matrix back = gwb::read_csv_matrix(path);
  ASSERT_EQ(back.rows(), m.rows());
  ASSERT_EQ(back.cols(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) EXPECT_EQ(back(i, j), m(i, j));
  std::filesystem::remove(path);
}

TEST(Io, SpaceJsonRoundTrip) {
  gwb::Rng rng(11);
  const MmSpace s = testutil::random_weighted_space(rng, 5);
  const Matrix f = testutil::random_points(rng, 5, 2);
  const std::string path = "tmp_space.json";
  gwb::save_space(path, s, f);
  const gwb::SpaceFile back = gwb::load_space(path);
  ASSERT_EQ(back.space.size(), 5u);
  ASSERT_TRUE(back.features.has_value());
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back.space.weights[i], s.weights[i]);
    for (std::size_t j = 0; j < 5; ++j)
      EXPECT_EQ(back.space.distances(i, j), s.distances(i, j));
    for (std::size_t c = 0; c < 2; ++c)
      EXPECT_EQ((*back.features)(i, c), f(i, c));
  }
  std::filesystem::remove(path);
}

TEST(Io, CsvFileLoadsAsUniformSpace) {
  const std::string path = "tmp_space.csv";
  gwb::write_csv_matrix(path, valid_triangle());
  const gwb::SpaceFile back = gwb::load_space(path);
  EXPECT_FALSE(back.features.has_value());
  EXPECT_DOUBLE_EQ(back.space.weights[0], 1.0 / 3.0);
  std::filesystem::remove(path);
}

TEST(Io, MissingFileIsIoError) {
  EXPECT_THROW(gwb::load_space("no_such_file.json"), gwb::io_error);
  EXPECT_THROW(gwb::read_csv_matrix("no_such_file.csv"), gwb::io_error);
}

TEST(Io, ParseErrorNamesLineAndField) {
  const std::string path = "tmp_bad.csv";
  {
    std::ofstream out(path);
    out << "0,1\n1,abc\n";
  }
  try {
    gwb::read_csv_matrix(path);
    FAIL() << "expected io_error";
  } catch (const gwb::io_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Io, FormatDoubleRoundTripsShortest) {
  EXPECT_EQ(gwb::format_double(0.1), "0.1");
  EXPECT_EQ(gwb::format_double(1.0), "1");
  EXPECT_EQ(gwb::format_double(1.0 / 3.0), "0.3333333333333333");
}

TEST(Parallel, MatchesSerialAndPropagatesExceptions) {
  std::vector<double> out(100, 0.0);
  gwb::parallel_for(out.size(), 4, [&](std::size_t i) {
    out[i] = static_cast<double>(i) * 2.0;
  });
  for (std::size_t i = 0; i < out.size(); ++i)
    EXPECT_EQ(out[i], static_cast<double>(i) * 2.0);
  EXPECT_THROW(gwb::parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
               std::runtime_error);
}

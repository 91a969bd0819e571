#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gwb/gwb.hpp"

// GWB_CLI_PATH is injected by the build as the absolute path of the binary.

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(GWB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("gwb_cli_" + std::to_string(::testing::UnitTest::GetInstance()
                                           ->random_seed()) +
           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string at(const std::string& rel) const { return (dir / rel).string(); }

  fs::path dir;
};

}  // namespace

TEST_F(CliTest, ShapesDistKnnPipeline) {
  ASSERT_EQ(run("gen shapes --out " + at("corpus") +
                " --per-class 3 --n 12 --seed 1"),
            0);
  std::size_t shapes = 0;
  for (const auto& e : fs::directory_iterator(dir / "corpus"))
    shapes += e.path().filename().string().rfind("shape_", 0) == 0;
  EXPECT_EQ(shapes, 12u);  // 4 classes x 3
  EXPECT_EQ(line_count(dir / "corpus" / "labels.csv"), 12u);

  ASSERT_EQ(run("dist " + at("corpus") + "/shape_*.json --bound stlb --r 8 " +
                "--L 30 --seed 3 --out " + at("d1")),
            0);
  const gwb::Matrix m = gwb::read_csv_matrix(at("d1/dist.csv"));
  ASSERT_EQ(m.rows(), 12u);
  ASSERT_EQ(m.cols(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(m(i, i), 0.0);
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_EQ(m(i, j), m(j, i));
      EXPECT_GE(m(i, j), 0.0);
    }
  }
  const auto manifest = gwb::load_json(at("d1/dist.csv.manifest.json"));
  EXPECT_NE(manifest.at("command").get<std::string>().find(" dist "),
            std::string::npos);
  EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 3u);
  EXPECT_TRUE(manifest.at("config").contains("direction_seed"));

  // Same seed, fresh output directory: byte-identical matrix.
  ASSERT_EQ(run("dist " + at("corpus") + "/shape_*.json --bound stlb --r 8 " +
                "--L 30 --seed 3 --out " + at("d2")),
            0);
  EXPECT_EQ(slurp(dir / "d1" / "dist.csv"), slurp(dir / "d2" / "dist.csv"));

  ASSERT_EQ(run("knn --matrix " + at("d1/dist.csv") + " --labels " +
                at("corpus/labels.csv") + " --k 1 --splits 5 --seed 9 --out " +
                at("knn")),
            0);
  EXPECT_EQ(line_count(dir / "knn" / "knn.csv"), 6u);  // header + 5 splits
}

TEST_F(CliTest, IsotestAllIsomorphicScoresPerfectly) {
  ASSERT_EQ(run("isotest --model ws --n 8 --pairs 4 --repeats 2 --bounds stlb "
                "--r 4 --L 30 --all-isomorphic --seed 2 --out " +
                at("iso")),
            0);
  std::ifstream in(dir / "iso" / "isotest.csv");
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, "bound,repeat,accuracy");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "1");
  }
  EXPECT_EQ(rows, 2u);
}

TEST_F(CliTest, BaryRunsAndRecordsItsConfig) {
  ASSERT_EQ(run("gen shape --kind ring --n 8 --seed 1 --out " + at("t1.json")), 0);
  ASSERT_EQ(run("gen shape --kind cross --n 8 --seed 2 --out " + at("t2.json")), 0);
  ASSERT_EQ(run("bary " + at("t1.json") + " " + at("t2.json") +
                " --distance stlb --n-points 6 --dim 2 --steps 3 --restarts 1 "
                "--r 6 --L 20 --seed 7 --out " +
                at("bary")),
            0);
  EXPECT_EQ(line_count(dir / "bary" / "bary_points.csv"), 6u);
  EXPECT_TRUE(fs::exists(dir / "bary" / "bary_trace.csv"));
  const auto manifest = gwb::load_json(at("bary/bary_points.csv.manifest.json"));
  EXPECT_EQ(manifest.at("config").at("steps").get<int>(), 3);
  EXPECT_EQ(manifest.at("config").at("distance"), "stlb");
}

TEST_F(CliTest, ExitCodesFollowTheErrorTaxonomy) {
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);                      // missing subcommand
  EXPECT_EQ(run("dist a.json b.json --bound nope"), 2);
  EXPECT_EQ(run("dist --no-such-flag"), 2);
  EXPECT_EQ(run("dist " + at("missing1.json") + " " + at("missing2.json") +
                " --bound flb"),
            4);
  ASSERT_EQ(run("gen shape --kind ring --n 6 --seed 1 --out " + at("s.json")), 0);
  // sliced bounds are quadratic-only, so --p 3 is a validation failure
  EXPECT_EQ(run("dist " + at("s.json") + " " + at("s.json") +
                " --bound stlb --p 3"),
            2);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "msbridge/config.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/io.hpp"
#include "msbridge/selftest.hpp"

namespace msb {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("msbridge_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(TempDir, MeasureRoundTrip) {
  DiscreteMeasure m(Grid({-1.0, 0.1, 2.5}), {0.1, 0.7, 0.2});
  io::write_measure(path("m.csv"), m);
  auto back = io::read_measure(path("m.csv"));
  EXPECT_EQ(back.grid(), m.grid());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.weight(i), m.weight(i));
}

TEST_F(TempDir, JointRoundTrip) {
  auto p = test::fixture_p();
  io::write_joint(path("p.csv"), p);
  auto back = io::read_joint(path("p.csv"));
  EXPECT_EQ(back.xgrid(), p.xgrid());
  EXPECT_EQ(back.ygrid(), p.ygrid());
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(back.weights()[k], p.weights()[k]);
}

TEST_F(TempDir, FunctionRoundTrip) {
  Grid g({0.0, 1.0});
  io::write_function(path("h.csv"), g, {0.1 + 0.2, -3.0}, "h");
  auto back = io::read_function(path("h.csv"), g);
  EXPECT_EQ(back[0], 0.1 + 0.2);
  EXPECT_EQ(back[1], -3.0);
}

TEST_F(TempDir, HeaderlessQuotes) {
  io::write_text(path("q.csv"), "0,1\n1,0\n2,0\n");
  auto q = io::read_quotes(path("q.csv"));
  ASSERT_EQ(q.size(), 3u);
  EXPECT_EQ(q[0].price, 1.0);
}

TEST_F(TempDir, BadInputIsIoError) {
  EXPECT_THROW(io::read_measure(path("missing.csv")), IoError);
  io::write_text(path("bad.csv"), "point,weight\n0,abc\n");
  EXPECT_THROW(io::read_measure(path("bad.csv")), IoError);
  io::write_text(path("short.csv"), "x,y,weight\n0,1\n");
  EXPECT_THROW(io::read_joint(path("short.csv")), IoError);
}

TEST(G17, RoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123}) EXPECT_EQ(std::stod(io::g17(x)), x);
}

TEST(Config, ParsesAllSections) {
  auto cfg = parse_run_config(
      "[input]\njoint = p.csv\nnu = nu.csv\n"
      "[solver]\nmax_iters = 500\nmarginal_tol = 1e-12\n"
      "[duality]\ngammas = 0.5, 1, 5\nrandom_witnesses = 2\n"
      "[approx]\ndeltas = 0.1, 0.01\neps_ratio = 0.25\nhorizon = 10\nwrite_q_tilde = true\n"
      "[output]\ndir = out\n"
      "[run]\nseed = 9\n",
      "test.ini");
  EXPECT_EQ(cfg.joint_path, "p.csv");
  EXPECT_EQ(cfg.solver.max_iters, 500);
  EXPECT_EQ(cfg.solver.marginal_tol, 1e-12);
  EXPECT_EQ(cfg.gammas, (std::vector<double>{0.5, 1.0, 5.0}));
  EXPECT_EQ(cfg.random_witnesses, 2);
  EXPECT_EQ(cfg.deltas, (std::vector<double>{0.1, 0.01}));
  EXPECT_EQ(cfg.schedule.ratio, 0.25);
  EXPECT_EQ(cfg.schedule.horizon, 10);
  EXPECT_TRUE(cfg.write_q_tilde);
  EXPECT_EQ(cfg.output_dir, "out");
  EXPECT_EQ(cfg.seed, 9u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_run_config("[solver]\nmax_iter = 5\n", "t"), DomainError);
  EXPECT_THROW(parse_run_config("[solver]\nmarginal_tol = -1\n", "t"), DomainError);
  EXPECT_THROW(parse_run_config("[input]\nnu = a\nquotes = b\n", "t"), DomainError);
  EXPECT_THROW(parse_run_config("no section\n", "t"), DomainError);
  EXPECT_THROW(parse_number_list("1, x", "gammas"), DomainError);
}

TEST(Selftest, AllChecksPass) {
  for (const auto& c : run_selftest(1)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

}  // namespace
}  // namespace msb

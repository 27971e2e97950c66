#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cal/experiments/experiments.hpp"

using namespace cal;

TEST(Generators, Lissajous) {
  const auto [a, b] = gen::lissajous(0);
  EXPECT_NEAR(a, 0.0, 1e-12);
  EXPECT_NEAR(b, 0.5, 1e-12);
  const auto [c, d] = gen::lissajous(360);
  EXPECT_NEAR(c, a, 1e-12);
  EXPECT_NEAR(d, b, 1e-12);
  const auto [e, f] = gen::lissajous(90);
  EXPECT_NEAR(e, 0.0, 1e-12);
  EXPECT_NEAR(f, -std::cos(std::numbers::pi / 6), 1e-12);
  EXPECT_NEAR(gen::lissajous(45).first, 1.0, 1e-12);
}

TEST(Generators, Popeq) {
  EXPECT_NEAR(gen::popeq(0.5, 3.89), 0.9725, 1e-12);
  EXPECT_EQ(gen::popeq(0.0, 3.89), 0.0);
  double s = 0.5;
  for (int i = 0; i < 10000; ++i) {
    s = gen::popeq(s, 3.89);
    ASSERT_GT(s, 0.0);
    ASSERT_LT(s, 1.0);
  }
}

TEST(Generators, ShapeSymmetry) {
  gen::ShapeSpec spec;
  spec.kind = gen::Shape::square;
  EXPECT_EQ(gen::shape_frame(spec, 0).pixels, gen::shape_frame(spec, 90).pixels);
  spec.kind = gen::Shape::triangle;
  EXPECT_EQ(gen::shape_frame(spec, 0).pixels, gen::shape_frame(spec, 120).pixels);
  spec.kind = gen::Shape::circle3d;
  const auto edge = gen::shape_frame(spec, 90);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < edge.rows; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < edge.cols; ++j) any = any || edge.at(i, j);
    rows += any;
  }
  EXPECT_EQ(rows, 1u);
}

TEST(Generators, ReceptiveFields) {
  gen::ShapeSpec spec;
  const auto frame = gen::shape_frame(spec, 0);
  const auto fields = gen::receptive_fields(frame);
  ASSERT_EQ(fields.size(), 9u);
  std::size_t total = 0;
  for (const auto& f : fields) total += f.count();
  EXPECT_EQ(total, frame.count());
}

TEST(Generators, BlockOrderNoImmediateRepeat) {
  Rng rng(1);
  const auto order = gen::block_order(20, 7, rng);
  ASSERT_EQ(order.size(), 140u);
  for (std::size_t i = 1; i < order.size(); ++i) EXPECT_NE(order[i], order[i - 1]);
}

TEST(Metrics, RunningRms) {
  metrics::RunningRms r(2);
  EXPECT_FALSE(r.value());
  r.push(3.0);
  r.push(4.0);
  EXPECT_NEAR(*r.value(), std::sqrt(12.5), 1e-12);
  r.push(0.0);
  EXPECT_NEAR(*r.value(), std::sqrt(8.0), 1e-12);
}

TEST(Registry, KnowsEveryExperiment) {
  for (const char* n : {"association", "forgetting", "lissajous", "persistence", "popeq", "reconstruction", "shapes"})
    EXPECT_TRUE(exp::registry().count(n)) << n;
  EXPECT_THROW(exp::run("nope", {}), std::invalid_argument);
}

TEST(Experiments, IntegerReconstructionWritesArtifacts) {
  const auto dir = std::filesystem::temp_directory_path() / "cal_test_recon";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  exp::RunOptions opt;
  opt.out = dir;
  const auto rep = exp::run("reconstruction", opt);
  EXPECT_TRUE(rep.passed());
  exp::write_summary(rep, dir / "summary.json");
  for (const char* f : {"metrics.csv", "snapshot.bin", "summary.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::filesystem::remove_all(dir);
}

TEST(Experiments, ShortLissajousRuns) {
  exp::RunOptions opt;
  opt.config = {{"iterations", 720}};
  const auto rep = exp::run("lissajous", opt);
  EXPECT_GT(rep.values.at("quadrant_nonzero"), 0.0);
  EXPECT_EQ(rep.matrix.size(), 205u);
}

TEST(Experiments, ShortPopeqPredicts) {
  exp::RunOptions opt;
  opt.config = {{"iterations", 300}, {"rms_from", 200}, {"rms_to", 300}};
  const auto rep = exp::run("popeq", opt);
  EXPECT_LE(rep.values.at("first_prediction_iteration"), 50.0);
}

TEST(Experiments, SmallShapesRun) {
  exp::RunOptions opt;
  opt.config = {{"epochs", 2}, {"shapes", {"square", "triangle"}}, {"step_degrees", 30.0}, {"closest_pair", ""}};
  const auto rep = exp::run("shapes", opt);
  EXPECT_EQ(rep.matrix.size(), 24u);
  EXPECT_EQ(rep.checks.size(), 2u);
}

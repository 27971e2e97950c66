#include <gtest/gtest.h>

#include <sstream>

#include "cal/region.hpp"
#include "oracles.hpp"

using namespace cal;

namespace {

SparseBitVector random_vec(Rng& rng, std::size_t len, double p) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < len; ++i)
    if (rng.uniform() < p) idx.push_back(static_cast<Index>(i));
  return SparseBitVector(len, idx);
}

RegionConfig small_config(std::size_t pool) {
  RegionConfig c;
  c.channel_widths = {10, 6};
  c.geometry = {16, 2, 2};
  c.k_out = 3;
  c.pool_window = pool;
  c.hardwire_fanin = 2;
  return c;
}

}  // namespace

TEST(Gain, Examples) {
  SynapseArray ap(3, 5);
  for (double g : apical_gain(SparseBitVector(3), ap)) EXPECT_EQ(g, 1.0);
  ap.set_permanence(1, 3, 0.5);
  EXPECT_NEAR(apical_gain(SparseBitVector(3, {1}), ap)[3], 1.5, 1e-4);
}

TEST(Gain, MatchesDenseOracle) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t fw = 1 + rng.below(16), m = 1 + rng.below(16);
    SynapseArray ap(fw, m);
    for (std::size_t a = 0; a < fw; ++a)
      for (std::size_t i = 0; i < m; ++i)
        if (rng.uniform() < 0.3) ap.set_fixed(a, i, static_cast<PermanenceQ>(1 + rng.below(65535)));
    const auto f = random_vec(rng, fw, 0.4);
    const auto want = oracle::gain(oracle::dense_w(oracle::dense_q(ap), 0), oracle::mask(f));
    const auto got = apical_gain(f, ap);
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
  }
}

TEST(Region, PoolingIsUnionOfWindow) {
  Rng rng(5);
  Region r(small_config(3), 1);
  std::vector<oracle::Mask> history;
  for (int t = 0; t < 20; ++t) {
    const std::vector<SparseBitVector> in{random_vec(rng, 10, 0.2), random_vec(rng, 6, 0.2)};
    history.push_back(oracle::mask(concat(in)));
    EXPECT_EQ(r.step(in).pooled, oracle::vec(oracle::pool(history, 3)));
  }
}

TEST(Region, WindowOneEqualsComposition) {
  Rng rng(6);
  auto cfg = small_config(1);
  Region r(cfg, 9);
  auto cor = r.correlator();
  SequenceMemory sm(cfg.geometry, cfg.sm, derive_seed(9, 2));
  for (int t = 0; t < 30; ++t) {
    const std::vector<SparseBitVector> in{random_vec(rng, 10, 0.3), random_vec(rng, 6, 0.3)};
    const auto out = r.step(in);
    const auto y = cor.forward(concat(in));
    const auto s = sm.step(y, cfg.k());
    EXPECT_EQ(out.y, y);
    EXPECT_EQ(out.z, s.z);
    EXPECT_EQ(out.v, s.v);
  }
}

TEST(Region, PersistenceIsJaccardOfConsecutiveColumns) {
  Rng rng(7);
  Region r(small_config(2), 2);
  SparseBitVector prev(16);
  for (int t = 0; t < 20; ++t) {
    const std::vector<SparseBitVector> in{random_vec(rng, 10, 0.3), random_vec(rng, 6, 0.3)};
    const auto out = r.step(in);
    EXPECT_DOUBLE_EQ(out.persistence, jaccard(out.y, prev));
    prev = out.y;
  }
}

TEST(Region, FeedbackAppliesGain) {
  auto cfg = small_config(1);
  cfg.feedback_width = 4;
  Region r(cfg, 3);
  const std::vector<SparseBitVector> in{SparseBitVector(10, {1, 2, 3}), SparseBitVector(6, {4})};
  const SparseBitVector f(4, {0, 2});
  for (int t = 0; t < 10; ++t) r.step(in, &f);
  EXPECT_GT(r.apical().size(), 0u);
  const auto gain = apical_gain(f, r.apical());
  EXPECT_EQ(r.step(in, &f).y, r.correlator().activate(concat(in), gain));
}

TEST(Region, SnapshotRoundTrip) {
  Rng rng(8);
  auto cfg = small_config(3);
  cfg.correlator_mode = CorrelatorMode::learning;
  cfg.correlator_bits = 8;
  Region a(cfg, 4);
  for (int t = 0; t < 25; ++t) a.step(std::vector<SparseBitVector>{random_vec(rng, 10, 0.3), random_vec(rng, 6, 0.3)});
  std::stringstream ss;
  a.write(ss);
  Region b(cfg, 4);
  b.read(ss);
  EXPECT_EQ(a, b);
  for (int t = 0; t < 10; ++t) {
    const std::vector<SparseBitVector> in{random_vec(rng, 10, 0.3), random_vec(rng, 6, 0.3)};
    EXPECT_EQ(a.step(in).y, b.step(in).y);
  }
}

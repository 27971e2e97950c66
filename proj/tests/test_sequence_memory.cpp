#include <gtest/gtest.h>

#include <sstream>

#include "cal/sequence_memory.hpp"
#include "oracles.hpp"

using namespace cal;

namespace {

SparseBitVector random_k(Rng& rng, std::size_t len, std::size_t k) {
  std::vector<Index> all(len);
  for (std::size_t i = 0; i < len; ++i) all[i] = static_cast<Index>(i);
  rng.shuffle(all);
  all.resize(k);
  return SparseBitVector::from_unsorted(len, all);
}

}  // namespace

TEST(SMPieces, Verified) {
  const SMGeometry g{2, 2, 1};
  EXPECT_EQ(verified(g, SparseBitVector(2, {0}), SparseBitVector(4, {1})), SparseBitVector(4, {1}));
  EXPECT_TRUE(verified(g, SparseBitVector(2, {0}), SparseBitVector(4)).empty());
  EXPECT_TRUE(verified(g, SparseBitVector(2), SparseBitVector(4, {1})).empty());
}

TEST(SMPieces, Unpredicted) {
  const SMGeometry g{2, 2, 1};
  EXPECT_EQ(unpredicted_columns(g, SparseBitVector(2, {0, 1}), SparseBitVector(4, {3})), SparseBitVector(2, {0}));
  EXPECT_TRUE(unpredicted_columns(g, SparseBitVector(2, {0, 1}), SparseBitVector(4, {0, 2})).empty());
  EXPECT_EQ(unpredicted_columns(g, SparseBitVector(2, {0, 1}), SparseBitVector(4)), SparseBitVector(2, {0, 1}));
}

TEST(SMPieces, Bursting) {
  const SMGeometry g{3, 3, 1};
  EXPECT_EQ(bursting(g, SparseBitVector(3, {1})), SparseBitVector(9, {3, 4, 5}));
  EXPECT_TRUE(bursting(g, SparseBitVector(3)).empty());
  EXPECT_EQ(bursting(g, SparseBitVector::full(3)), SparseBitVector::full(9));
}

TEST(SMPieces, ActiveAndExcite) {
  EXPECT_EQ(active_cells(SparseBitVector(8, {1}), SparseBitVector(8, {4, 5})), SparseBitVector(8, {1, 4, 5}));
  EXPECT_EQ(active_cells(SparseBitVector(8, {1}), SparseBitVector(8)), SparseBitVector(8, {1}));
  SynapseArray w(4, 8);
  for (double e : excite(SparseBitVector(4), w)) EXPECT_EQ(e, 0.0);
  w.set_permanence(0, 7, 0.8);
  EXPECT_NEAR(excite(SparseBitVector(4, {0}), w)[7], 0.8, 1e-4);
}

TEST(SMPieces, SelectSegments) {
  const SMGeometry g{3, 2, 2};  // 4 segments per column
  Rng rng(1);
  std::vector<double> d(12, 0.0);
  for (int i = 0; i < 12; ++i) d[i] = 0.1 * (i + 1);
  EXPECT_EQ(select_segments(g, d, SparseBitVector(3), 3, rng), SparseBitVector(12, {9, 10, 11}));

  std::vector<double> zero(12, 0.0);
  const auto s = select_segments(g, zero, SparseBitVector(3, {1}), 2, rng);
  ASSERT_EQ(s.cardinality(), 1u);
  EXPECT_GE(s.indices()[0], 4u);
  EXPECT_LT(s.indices()[0], 8u);

  std::vector<double> peak(12, 0.0);
  peak[4 + 3] = 0.5;
  peak[4 + 1] = 0.2;
  EXPECT_TRUE(select_segments(g, peak, SparseBitVector(3, {1}), 1, rng).test(7));
}

TEST(SMPieces, PredictCells) {
  const SMGeometry g{2, 4, 2};
  EXPECT_TRUE(predict_cells(g, SparseBitVector(16)).empty());
  EXPECT_EQ(predict_cells(g, SparseBitVector(16, {10})), SparseBitVector(8, {5}));
  EXPECT_EQ(predict_cells(g, SparseBitVector(16, {10, 11})), SparseBitVector(8, {5}));
}

TEST(SequenceMemory, ColdStartBursts) {
  SequenceMemory sm({8, 4, 2}, {}, 3);
  const auto r = sm.step(SparseBitVector(8, {1, 5}), 2);
  EXPECT_TRUE(r.v.empty());
  EXPECT_EQ(r.a, bursting(sm.geometry(), SparseBitVector(8, {1, 5})));
}

TEST(SequenceMemory, LearnsPeriodicSequence) {
  const SMGeometry g{32, 4, 2};
  SMParams p;
  p.plasticity = {0.2, 0.1, 0.04, false, false, 0};
  p.burst_grow = true;
  SequenceMemory sm(g, p, 7);
  Rng rng(2);
  std::vector<SparseBitVector> seq;
  for (int i = 0; i < 4; ++i) seq.push_back(random_k(rng, 32, 4));
  for (int c = 0; c < 50; ++c)
    for (const auto& y : seq) sm.step(y, 4);
  sm.set_learning(false);
  sm.step(seq[0], 4);
  const auto r = sm.step(seq[1], 4);
  EXPECT_EQ(columns_of(g, r.z), seq[2]);
  // Fully predicted input: no bursting.
  const auto next = sm.step(seq[2], 4);
  EXPECT_EQ(next.a, next.v);
}

TEST(SequenceMemory, MatchesDenseOracle) {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const std::uint32_t cols = 2 + static_cast<std::uint32_t>(rng.below(6));
    const std::uint32_t cells = 1 + static_cast<std::uint32_t>(rng.below(3));
    const std::uint32_t segs = 1 + static_cast<std::uint32_t>(rng.below(2));
    SMParams p;
    p.plasticity = {0.2, 0.1 * rng.uniform(), 0.05 * rng.uniform(), rng.below(2) == 1, rng.below(2) == 1, 0};
    p.weight_bits = std::array<unsigned, 3>{0, 2, 8}[rng.below(3)];
    p.burst_grow = rng.below(2) == 1;
    const auto seed = rng.next();
    SequenceMemory sm({cols, cells, segs}, p, seed);
    oracle::SequenceMemory ref(cols, cells, segs, p.plasticity, p.weight_bits, seed);
    ref.burst_grow = p.burst_grow;
    const std::size_t k = 1 + rng.below(3);
    std::vector<SparseBitVector> seq;
    for (int i = 0; i < 3; ++i) seq.push_back(random_k(rng, cols, 1 + rng.below(2)));
    for (int step = 0; step < 12; ++step) {
      const auto& y = seq[step % 3];
      const auto got = sm.step(y, k);
      const auto want = ref.step(oracle::mask(y), k);
      ASSERT_EQ(got.v, oracle::vec(want.v));
      ASSERT_EQ(got.a, oracle::vec(want.a));
      ASSERT_EQ(got.z, oracle::vec(want.z));
      ASSERT_EQ(oracle::dense_q(sm.synapses()), ref.q);
    }
  }
}

TEST(SequenceMemory, DeterministicAndSnapshot) {
  const SMGeometry g{16, 4, 2};
  SequenceMemory a(g, {}, 5), b(g, {}, 5);
  Rng rng(1);
  for (int t = 0; t < 40; ++t) {
    const auto y = random_k(rng, 16, 3);
    a.step(y, 3);
    b.step(y, 3);
  }
  EXPECT_EQ(a, b);
  std::stringstream ss;
  a.write(ss);
  SequenceMemory c(g, {}, 123);
  c.read(ss);
  EXPECT_EQ(a, c);
  const auto y = random_k(rng, 16, 3);
  EXPECT_EQ(a.step(y, 3).z, c.step(y, 3).z);
}

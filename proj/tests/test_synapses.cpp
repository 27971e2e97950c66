#include <gtest/gtest.h>

#include <sstream>

#include "cal/synapses.hpp"
#include "oracles.hpp"

using namespace cal;

namespace {

SynapseArray random_array(Rng& rng, std::size_t m, std::size_t n, double density, unsigned bits) {
  SynapseArray a(m, n, bits);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rng.uniform() < density) a.set_fixed(i, j, static_cast<PermanenceQ>(1 + rng.below(65535)));
  return a;
}

SparseBitVector random_vec(Rng& rng, std::size_t len, double p) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < len; ++i)
    if (rng.uniform() < p) idx.push_back(static_cast<Index>(i));
  return SparseBitVector(len, idx);
}

}  // namespace

TEST(Quantize, Examples) {
  EXPECT_DOUBLE_EQ(quantize(0.6, 1), 1.0);
  EXPECT_DOUBLE_EQ(quantize(0.24, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(quantize(0.49999, 1), 0.0);
  EXPECT_DOUBLE_EQ(quantize(0.37, 0), 0.37);
  EXPECT_THROW(quantize(1.5, 2), std::invalid_argument);
}

TEST(Meta, Factor) {
  EXPECT_DOUBLE_EQ(metaplastic_factor(0.0), 1.0);
  EXPECT_DOUBLE_EQ(metaplastic_factor(1.0), 0.0);
  EXPECT_DOUBLE_EQ(metaplastic_factor(0.5), 0.5);
}

TEST(MinConnected, IsSmallestNonzeroWeight) {
  for (unsigned bits : {0u, 1u, 2u, 3u, 4u, 8u}) {
    const auto q = min_connected_permanence(bits);
    EXPECT_GT(quantize(to_permanence(q), bits), 0.0);
    EXPECT_EQ(quantize(to_permanence(q - 1), bits), 0.0);
  }
}

TEST(Kwta, Examples) {
  SynapseArray id(4, 4);
  for (int j = 0; j < 4; ++j) id.set_permanence(j, j, 1.0);
  EXPECT_EQ(kwta_activate(id, SparseBitVector(4, {2}), 1), SparseBitVector(4, {2}));
  EXPECT_TRUE(kwta_activate(id, SparseBitVector(4), 2).empty());
}

TEST(Kwta, MatchesDenseOracle) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng.below(40), n = 1 + rng.below(40), k = 1 + rng.below(n);
    const unsigned bits = std::array<unsigned, 4>{0, 1, 2, 8}[rng.below(4)];
    const auto a = random_array(rng, m, n, 0.3, bits);
    const auto x = random_vec(rng, m, 0.3);
    const auto w = oracle::dense_w(oracle::dense_q(a), bits);
    EXPECT_EQ(kwta_activate(a, x, k), oracle::vec(oracle::top_k(oracle::excite(w, oracle::mask(x)), k)));
  }
}

TEST(Update, Examples) {
  SynapseArray a(1, 1);
  a.set_permanence(0, 0, 0.5);
  PlasticityParams p{0.1, 0.05, 0.02, false, false, 0};
  a.update(SparseBitVector(1, {0}), SparseBitVector(1, {0}), p);
  EXPECT_NEAR(*a.permanence(0, 0), 0.6, 1.0 / 65535);

  SynapseArray b(1, 2);
  b.set_permanence(0, 0, 0.03);
  const auto st = b.update(SparseBitVector(1, {0}), SparseBitVector(2, {1}), p);
  EXPECT_FALSE(b.permanence(0, 0));
  EXPECT_EQ(st.pruned, 1u);
  EXPECT_EQ(b.size(), 0u);
}

TEST(Update, MatchesDenseOracle) {
  Rng rng(31);
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + rng.below(12), n = 1 + rng.below(12);
    const unsigned bits = std::array<unsigned, 3>{0, 2, 8}[rng.below(3)];
    auto a = random_array(rng, m, n, 0.5, bits);
    const auto x = random_vec(rng, m, 0.4), y = random_vec(rng, n, 0.4);
    PlasticityParams p{0.01 + 0.3 * rng.uniform(), 0.3 * rng.uniform(), 0.3 * rng.uniform(), rng.below(2) == 1,
                       rng.below(2) == 1, 0};
    auto q = oracle::dense_q(a);
    oracle::update(q, oracle::mask(x), oracle::mask(y), p);
    a.update(x, y, p);
    EXPECT_EQ(oracle::dense_q(a), q);
  }
}

TEST(Update, BalanceEqualisesTotals) {
  // Unclipped instance: total decrement equals total increment.
  SynapseArray a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a.set_permanence(i, j, 0.5);
  const auto st = a.update(SparseBitVector(4, {0, 1}), SparseBitVector(4, {0}), PlasticityParams{});
  EXPECT_NEAR(st.increment, st.decrement, 1e-3);
}

TEST(Grow, Examples) {
  SynapseArray a(4, 2);
  const auto init = min_connected_permanence(0);
  EXPECT_EQ(a.grow(SparseBitVector(4, {3}), SparseBitVector(2, {1}), init), 1u);
  EXPECT_EQ(a.fixed(3, 1), init);

  SynapseArray b(10, 2);
  for (int i = 0; i < 5; ++i) b.set_permanence(i, 0, 0.5);
  for (int i = 0; i < 2; ++i) b.set_permanence(i, 1, 0.5);
  EXPECT_EQ(b.grow(SparseBitVector(10, {9}), SparseBitVector(2, {0, 1}), init), 1u);
  EXPECT_TRUE(b.fixed(9, 1));

  EXPECT_EQ(b.grow(SparseBitVector(10, {0}), SparseBitVector(2, {0, 1}), init), 0u);
}

TEST(Grow, MatchesDenseOracle) {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng.below(12), n = 1 + rng.below(12);
    const unsigned bits = std::array<unsigned, 3>{0, 2, 8}[rng.below(3)];
    const std::size_t max_fanin = rng.below(4);
    SynapseArray a(m, n, bits, max_fanin);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < 0.2 && (!max_fanin || a.fanin(j) < max_fanin))
          a.set_fixed(i, j, static_cast<PermanenceQ>(1 + rng.below(65535)));
    const auto x = random_vec(rng, m, 0.4), y = random_vec(rng, n, 0.4);
    auto q = oracle::dense_q(a);
    const auto init = min_connected_permanence(bits);
    oracle::grow(q, oracle::mask(x), oracle::mask(y), init, bits, max_fanin);
    a.grow(x, y, init);
    EXPECT_EQ(oracle::dense_q(a), q);
  }
}

TEST(Connect, RealizesMissingPairs) {
  SynapseArray a(3, 3);
  a.set_permanence(0, 0, 0.9);
  EXPECT_EQ(a.connect(SparseBitVector(3, {0, 1}), SparseBitVector(3, {0, 2}), to_fixed(0.5)), 3u);
  EXPECT_NEAR(*a.permanence(0, 0), 0.9, 1e-4);
  EXPECT_TRUE(a.fixed(1, 0) && a.fixed(0, 2) && a.fixed(1, 2));
}

TEST(SynapseArray, SnapshotRoundTrip) {
  Rng rng(51);
  const auto a = random_array(rng, 20, 30, 0.2, 4);
  std::stringstream ss;
  a.write(ss);
  EXPECT_EQ(SynapseArray::read(ss), a);
  std::stringstream bad("CALSYX");
  EXPECT_THROW(SynapseArray::read(bad), SnapshotError);
}

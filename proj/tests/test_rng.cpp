#include <gtest/gtest.h>

#include <cmath>
#include <unordered_set>
#include <vector>

#include "dht/rng.hpp"

using dht::CounterRng;

TEST(Philox, KnownAnswerZeroCounterZeroKey) {
  const auto out = dht::philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = dht::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                      {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = dht::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterRng, SameSeedSameStream) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, DifferentSeedsDiffer) {
  CounterRng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  EXPECT_EQ(equal, 0);
}

TEST(CounterRng, UniformRangeAndMean) {
  CounterRng rng(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_pos();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(CounterRng, NormalMoments) {
  CounterRng rng(9);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(CounterRng, BelowIsInRangeAndRoughlyUniform) {
  CounterRng rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  const double p = 1.0 / 7.0, sd = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_NEAR(c, n * p, 4.0 * sd);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(CounterRng, CategoricalFollowsCdf) {
  CounterRng rng(5);
  const std::vector<double> cdf = {0.2, 0.2, 0.7, 1.0};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(cdf)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0], 0.2 * n, 4.0 * std::sqrt(n * 0.16));
  EXPECT_NEAR(counts[2], 0.5 * n, 4.0 * std::sqrt(n * 0.25));
}

TEST(DeriveSeed, DeterministicAndDistinct) {
  EXPECT_EQ(dht::derive_seed(5, 1, 10), dht::derive_seed(5, 1, 10));
  EXPECT_NE(dht::derive_seed(5, 1, 10), dht::derive_seed(5, 1, 11));
  EXPECT_NE(dht::derive_seed(5, 1, 10), dht::derive_seed(5, 2, 10));
  EXPECT_NE(dht::derive_seed(5, 1, 10), dht::derive_seed(6, 1, 10));
  static_assert(dht::derive_seed(1, 2, 3) == dht::derive_seed(1, 2, 3));
}

TEST(DeriveSeed, NoCollisionsOverManyIndices) {
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 200000; ++i) {
    ASSERT_TRUE(seen.insert(dht::derive_seed(123, 1, i)).second) << i;
  }
}

TEST(Mix64, IsInvertibleOnSamples) {
  // Distinct inputs give distinct outputs (bijection spot check).
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100000; ++i) ASSERT_TRUE(seen.insert(dht::mix64(i)).second);
}

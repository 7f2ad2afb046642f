#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "simplenet/rng.hpp"

using namespace simplenet;

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32 R=10).
TEST(Philox, KnownAnswerVectors) {
  using Ctr = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Ctr{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (Ctr{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (Ctr{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, BlocksAreAddressable) {
  RandomStream a(42, StreamId::noise);
  for (int i = 0; i < 5; ++i) a.next_block();
  RandomStream b(42, StreamId::noise, 5);
  EXPECT_EQ(a.next_block(), b.next_block());
  EXPECT_EQ(a.position(), 6u);

  // Block i of stream s under seed k is philox({i, s}, {k}).
  RandomStream c(0x0123456789abcdefULL, StreamId::synth, 0x100000002ULL);
  EXPECT_EQ(c.next_block(), philox4x32({2, 1, 4, 0}, {0x89abcdef, 0x01234567}));
}

TEST(RandomStream, StreamsAndSeedsDiffer) {
  RandomStream a(1, StreamId::init), b(1, StreamId::shuffle), c(2, StreamId::init);
  const auto x = a.next_block();
  EXPECT_NE(x, b.next_block());
  EXPECT_NE(x, c.next_block());
}

TEST(RandomStream, UniformAndBelowBounds) {
  RandomStream rng(7, StreamId::init);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Var(U) = 1/12; 5 standard errors.
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));

  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(RandomStream, NormalMoments) {
  RandomStream rng(9, StreamId::noise);
  const int n = 400000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(FillGaussian, PairsUseConsecutiveBlocks) {
  std::vector<double> out(7);
  const auto used = fill_gaussian<double>(out, 1.0, 2.0, 11, StreamId::noise, 100);
  EXPECT_EQ(used, 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto pair = gaussian_pair(philox4x32({static_cast<std::uint32_t>(100 + j), 0, 3, 0}, {11, 0}));
    EXPECT_DOUBLE_EQ(out[2 * j], 1.0 + 2.0 * pair[0]);
    if (2 * j + 1 < out.size()) EXPECT_DOUBLE_EQ(out[2 * j + 1], 1.0 + 2.0 * pair[1]);
  }
  // A suffix fill starting at the matching block reproduces the tail.
  std::vector<double> tail(3);
  fill_gaussian<double>(tail, 1.0, 2.0, 11, StreamId::noise, 102);
  EXPECT_EQ(tail[0], out[4]);
  EXPECT_EQ(tail[1], out[5]);
  EXPECT_EQ(tail[2], out[6]);
}

TEST(ShuffledIndices, IsDeterministicPermutation) {
  for (std::size_t n : {0u, 1u, 2u, 17u, 1000u}) {
    RandomStream a(3, StreamId::shuffle), b(3, StreamId::shuffle);
    auto p = shuffled_indices(n, a);
    EXPECT_EQ(p, shuffled_indices(n, b));
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(n);
    std::iota(iota.begin(), iota.end(), 0);
    EXPECT_EQ(sorted, iota);
    if (n >= 17) EXPECT_NE(p, iota);
  }
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "simplenet/error.hpp"
#include "simplenet/evaluation.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace simplenet;
using namespace oracles;

namespace {

LabeledScores random_instance(std::mt19937_64& gen, std::size_t n, int distinct) {
  LabeledScores d;
  d.scores.resize(n);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = static_cast<std::uint8_t>(gen() % 2);
    d.scores[i] = distinct > 0 ? static_cast<float>(gen() % distinct)
                               : std::uniform_real_distribution<float>(-1, 1)(gen);
  }
  d.labels[0] = 0;
  d.labels[n - 1] = 1;
  return d;
}

double f1_at(const LabeledScores& d, double t) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < d.scores.size(); ++i) {
    const bool pred = d.scores[i] > t;
    if (pred && d.labels[i]) ++tp;
    else if (pred) ++fp;
    else if (d.labels[i]) ++fn;
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

}  // namespace

TEST(Auroc, MatchesPairwiseOracleExactly) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 199;
    const int distinct = trial % 3 == 0 ? 0 : (trial % 3 == 1 ? 3 : 1 + static_cast<int>(gen() % 20));
    const auto d = random_instance(gen, n, distinct);
    EXPECT_EQ(auroc(d), pairwise_auroc(d)) << "trial " << trial;
  }
}

TEST(Auroc, HandCases) {
  EXPECT_EQ(auroc({{0.1f, 0.9f}, {0, 1}}), 1.0);
  EXPECT_EQ(auroc({{0.9f, 0.1f}, {0, 1}}), 0.0);
  EXPECT_EQ(auroc({{0.5f, 0.5f, 0.5f}, {0, 1, 1}}), 0.5);
  try {
    auroc({{0.1f, 0.2f}, {1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::undefined_metric);
  }
}

TEST(Auroc, MonotoneInvarianceAndComplement) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto d = random_instance(gen, 50, trial % 2 ? 0 : 5);
    const double base = auroc(d);
    auto t = d;
    for (auto& s : t.scores) s = std::exp(s) * 3.0f + 1.0f;
    EXPECT_EQ(auroc(t), base);
    auto neg = d;
    for (auto& s : neg.scores) s = -s;
    EXPECT_DOUBLE_EQ(auroc(neg) + base, 1.0);
  }
}

TEST(PixelAuroc, PartitionInvariance) {
  std::mt19937_64 gen(3);
  // One 6x8 map versus the same pixels split into three 2x8 maps.
  const auto whole = testutil::random_map(6, 8, gen);
  PixelMask mask{6, 8, std::vector<std::uint8_t>(48)};
  for (auto& v : mask.data) v = gen() % 3 == 0 ? 255 : 0;
  std::vector<ScoreMap> parts;
  std::vector<PixelMask> part_masks;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<float> s(whole.data().begin() + k * 16, whole.data().begin() + (k + 1) * 16);
    parts.emplace_back(2, 8, s);
    part_masks.push_back({2, 8, std::vector<std::uint8_t>(mask.data.begin() + k * 16, mask.data.begin() + (k + 1) * 16)});
  }
  const std::vector<ScoreMap> one{whole};
  const std::vector<PixelMask> one_mask{mask};
  EXPECT_EQ(pixel_auroc(one, one_mask), pixel_auroc(parts, part_masks));

  // 1x1 maps reduce to image-level auroc.
  std::vector<ScoreMap> pix;
  std::vector<PixelMask> pm;
  LabeledScores img;
  for (std::size_t i = 0; i < 30; ++i) {
    const float s = std::uniform_real_distribution<float>(0, 1)(gen);
    const std::uint8_t l = i % 2;
    pix.emplace_back(1, 1, std::vector<float>{s});
    pm.push_back({1, 1, {l}});
    img.scores.push_back(s);
    img.labels.push_back(l);
  }
  EXPECT_EQ(pixel_auroc(pix, pm), auroc(img));

  std::vector<PixelMask> wrong{{2, 2, std::vector<std::uint8_t>(4)}};
  EXPECT_THROW(pixel_auroc(one, wrong), Error);
}

TEST(BestF1, MatchesExhaustiveThresholdSearch) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto d = random_instance(gen, 2 + gen() % 60, trial % 2 ? 0 : 6);
    const auto got = best_f1_threshold(d);
    std::vector<double> cands{-std::numeric_limits<double>::infinity()};
    auto sorted = d.scores;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) cands.push_back(0.5 * (double(sorted[i]) + sorted[i + 1]));
    cands.push_back(std::numeric_limits<double>::infinity());
    double best = -1.0, best_t = 0.0;
    for (double t : cands) {
      const double f = f1_at(d, t);
      if (f > best) {
        best = f;
        best_t = t;
      }
    }
    EXPECT_EQ(got.f1, best);
    EXPECT_EQ(got.threshold, best_t);
    EXPECT_EQ(f1_at(d, got.threshold), got.f1);
  }
}

TEST(BestF1, ClosedForms) {
  // Perfect separation.
  const auto sep = best_f1_threshold({{0.1f, 0.2f, 0.8f, 0.9f}, {0, 0, 1, 1}});
  EXPECT_EQ(sep.f1, 1.0);
  EXPECT_EQ(sep.threshold, 0.5 * (static_cast<double>(0.2f) + static_cast<double>(0.8f)));
  // All tied: only "everything anomalous" helps, F1 = 2p / (p + 1) with p the positive fraction.
  for (std::size_t pos = 1; pos <= 5; ++pos) {
    LabeledScores d;
    for (std::size_t i = 0; i < 10; ++i) {
      d.scores.push_back(1.0f);
      d.labels.push_back(i < pos ? 1 : 0);
    }
    const double p = pos / 10.0;
    EXPECT_NEAR(best_f1_threshold(d).f1, 2 * p / (p + 1), 1e-15);
  }
  EXPECT_THROW(best_f1_threshold({{0.1f}, {0}}), Error);
}

TEST(StdProfile, MatchesTwoPassPopulationStd) {
  std::mt19937_64 gen(5);
  std::vector<FeatureTensor> feats;
  for (int i = 0; i < 4; ++i) feats.push_back(testutil::random_tensor(3 + i, 5, 7, gen, -2.0f + i, 3.0f));
  const auto prof = std_profile(feats, 10);
  ASSERT_EQ(prof.stds.size(), 7u);
  for (std::size_t c = 0; c < 7; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : feats)
      for (std::size_t l = 0; l < f.locations(); ++l, ++n) sum += f.data()[l * 7 + c];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& f : feats)
      for (std::size_t l = 0; l < f.locations(); ++l) ss += (f.data()[l * 7 + c] - mean) * (f.data()[l * 7 + c] - mean);
    EXPECT_NEAR(prof.stds[c], std::sqrt(ss / n), 1e-6);
  }
  EXPECT_EQ(prof.bin_edges.size(), 11u);
  EXPECT_EQ(prof.counts.size(), 10u);
  std::size_t total = 0;
  for (auto c : prof.counts) total += c;
  EXPECT_EQ(total, 7u);
}

TEST(StdProfile, ErrorCases) {
  EXPECT_THROW(std_profile(std::span<const FeatureTensor>{}, 10), Error);
  const std::vector<FeatureTensor> single{FeatureTensor(1, 1, 3)};
  EXPECT_THROW(std_profile(single, 10), Error);
  const std::vector<FeatureTensor> mixed{FeatureTensor(2, 2, 3), FeatureTensor(2, 2, 4)};
  EXPECT_THROW(std_profile(mixed, 10), Error);
  const std::vector<FeatureTensor> ok{FeatureTensor(2, 2, 3)};
  EXPECT_THROW(std_profile(ok, 0), Error);
  const auto constant = std_profile(ok, 4);
  for (double s : constant.stds) EXPECT_EQ(s, 0.0);
}

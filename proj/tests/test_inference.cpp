#include <gtest/gtest.h>

#include <algorithm>

#include "simplenet/error.hpp"
#include "simplenet/image_ops.hpp"
#include "simplenet/inference.hpp"
#include "test_util.hpp"

using namespace simplenet;

namespace {

ModelParams<float> finalized_model(std::size_t c, std::uint64_t seed) {
  auto m = init_model(c, c, AdaptorVariant::linear, seed);
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> dist(0.0f, 0.1f);
  for (auto& v : m.adaptor.weight.data) v += dist(gen);
  m.finalized = true;
  return m;
}

std::vector<HierarchyStack> stacks(std::size_t n, std::size_t c, std::mt19937_64& gen) {
  std::vector<HierarchyStack> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(std::vector<HierarchyLevel>{{2, testutil::random_tensor(8, 8, c / 2, gen)},
                                                 {3, testutil::random_tensor(4, 4, c - c / 2, gen)}});
  }
  return out;
}

}  // namespace

TEST(ScoreFeatures, RequiresFinalizedModelAndMatchingChannels) {
  auto m = init_model(4, 4, AdaptorVariant::linear, 0);
  FeatureTensor f(2, 2, 4, 0.1f);
  try {
    score_features(m, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state);
  }
  m.finalized = true;
  EXPECT_THROW(score_features(m, FeatureTensor(2, 2, 3)), Error);
}

TEST(ScoreFeatures, IsNegatedDiscriminatorOfAdaptedFeatures) {
  std::mt19937_64 gen(1);
  const auto m = finalized_model(6, 1);
  const auto f = testutil::random_tensor(3, 5, 6, gen);
  const auto s = score_features(m, f);
  const auto rows = as_rows<float>(f.data(), 15, 6);
  const auto d = discriminator_scores(m.discriminator, adaptor_forward(m.adaptor, rows));
  for (std::size_t i = 0; i < 15; ++i) EXPECT_EQ(s.data()[i], -d[i]);
  // Pre-adapted path skips the adaptor.
  const auto q = adaptor_forward(m.adaptor, rows);
  FeatureTensor qt(3, 5, 6, std::vector<float>(q.data.begin(), q.data.end()));
  EXPECT_EQ(score_features(m, qt, true), s);
}

TEST(BuildResult, ImageScoreIsRawMaxAndInvariantToPostprocessing) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = testutil::random_map(1 + gen() % 10, 1 + gen() % 10, gen, -3.0f, 3.0f);
    const auto a = build_result(raw, PostprocessOptions{});
    const auto b = build_result(raw, PostprocessOptions{37, 11, 1.5, false});
    EXPECT_EQ(a.image_score, raw.max());
    EXPECT_EQ(b.image_score, raw.max());
    EXPECT_EQ(a.map.height(), 224u);
    EXPECT_EQ(b.map.width(), 11u);
    EXPECT_EQ(a.raw_map, raw);
    EXPECT_LE(a.map.max(), a.image_score + 1e-5f);
    EXPECT_LE(b.map.max(), b.image_score + 1e-5f);
  }
}

TEST(BuildResult, ConstantRawMap) {
  const ScoreMap raw(5, 5, 0.7f);
  const auto r = build_result(raw, PostprocessOptions{32, 32, 4.0, false});
  EXPECT_EQ(r.image_score, 0.7f);
  for (float v : r.map.data()) EXPECT_NEAR(v, 0.7f, 1e-6);
}

TEST(BuildResult, ScoreAfterSmoothingFlag) {
  std::mt19937_64 gen(3);
  const auto raw = testutil::random_map(6, 6, gen);
  const auto r = build_result(raw, PostprocessOptions{24, 24, 4.0, true});
  EXPECT_EQ(r.image_score, r.map.max());
  EXPECT_THROW(build_result(ScoreMap(), PostprocessOptions{}), Error);
  EXPECT_THROW(build_result(raw, PostprocessOptions{0, 4, 4.0, false}), Error);
}

TEST(InferBatch, BatchSingleThreadsAndPermutationAgree) {
  std::mt19937_64 gen(4);
  const auto m = finalized_model(6, 2);
  const auto batch = stacks(7, 6, gen);
  InferenceOptions opt;
  opt.post = {32, 32, 4.0, false};
  const auto all = infer_batch(m, batch, PipelineConfig{}, opt);
  ASSERT_EQ(all.size(), 7u);
  opt.threads = 3;
  const auto threaded = infer_batch(m, batch, PipelineConfig{}, opt);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(threaded[i].map, all[i].map);
    EXPECT_EQ(threaded[i].image_score, all[i].image_score);
    const auto one = infer_batch(m, std::span<const HierarchyStack>(&batch[i], 1), PipelineConfig{}, opt);
    EXPECT_EQ(one[0].map, all[i].map);
    EXPECT_EQ(one[0].raw_map, all[i].raw_map);
  }
  std::vector<HierarchyStack> reversed(batch.rbegin(), batch.rend());
  const auto rev = infer_batch(m, reversed, PipelineConfig{}, opt);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(rev[6 - i].map, all[i].map);
}

TEST(InferBatch, ErrorsCarrySampleIndex) {
  std::mt19937_64 gen(5);
  const auto m = finalized_model(6, 3);
  auto batch = stacks(3, 6, gen);
  batch[2] = HierarchyStack({{2, FeatureTensor(8, 8, 5)}, {3, FeatureTensor(4, 4, 3)}});
  try {
    infer_batch(m, batch, PipelineConfig{}, InferenceOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape_mismatch);
    EXPECT_NE(std::string(e.what()).find("sample 2"), std::string::npos) << e.what();
  }
}

TEST(InferBatch, ScoreOrderReversesDiscriminatorOrder) {
  std::mt19937_64 gen(6);
  const auto m = finalized_model(4, 4);
  const auto f = testutil::random_tensor(4, 4, 4, gen);
  const auto s = score_features(m, f);
  const auto d = discriminator_scores(m.discriminator,
                                      adaptor_forward(m.adaptor, as_rows<float>(f.data(), 16, 4)));
  for (std::size_t a = 0; a < 16; ++a)
    for (std::size_t b = 0; b < 16; ++b) EXPECT_EQ(d[a] > d[b], s.data()[a] < s.data()[b]);
}

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "simplenet/feature_pipeline.hpp"
#include "simplenet/model.hpp"
#include "simplenet/tensor.hpp"

namespace simplenet {

struct AnomalyResult {
  ScoreMap map;       // at the requested output resolution, smoothed
  float image_score = 0.0f;
  ScoreMap raw_map;   // s = -D(q) at (H0, W0)
};

struct PostprocessOptions {
  std::size_t out_h = 224;
  std::size_t out_w = 224;
  double smoothing_sigma = 4.0;
  /// Take the image score as the max of the smoothed map instead of the raw map.
  bool score_after_smoothing = false;
};

/// Per-location anomaly scores s = -D(G(o)) (or -D(q) when `already_adapted`).
ScoreMap score_features(const ModelParams<float>& model, const FeatureTensor& features,
                        bool already_adapted = false);

/// Bilinear upsample to the output size, Gaussian smoothing, and the image
/// score (max of the raw map unless `score_after_smoothing`).
AnomalyResult build_result(const ScoreMap& raw, const PostprocessOptions& options);

struct InferenceOptions {
  PostprocessOptions post;
  /// Worker threads for batch inference; 0 picks the hardware concurrency.
  std::size_t threads = 1;
};

/// Results in input order. A failure is rethrown tagged with its sample index.
std::vector<AnomalyResult> infer_batch(const ModelParams<float>& model,
                                       std::span<const HierarchyStack> stacks,
                                       const PipelineConfig& pipeline, const InferenceOptions& options);

}  // namespace simplenet

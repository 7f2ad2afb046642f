#include "simplenet/inference.hpp"

#include <atomic>
#include <exception>
#include <string>
#include <thread>

#include "simplenet/error.hpp"
#include "simplenet/image_ops.hpp"

namespace simplenet {

ScoreMap score_features(const ModelParams<float>& model, const FeatureTensor& features,
                        bool already_adapted) {
  require(model.finalized, ErrorCode::state, "model is not finalized for inference");
  require(features.channels() == model.dim(), ErrorCode::shape_mismatch,
          "feature channels " + std::to_string(features.channels()) + " != model dimension " +
              std::to_string(model.dim()));
  auto rows = as_rows<float>(features.data(), features.locations(), features.channels());
  if (!already_adapted) rows = adaptor_forward(model.adaptor, rows);
  auto scores = discriminator_scores(model.discriminator, rows);
  for (auto& s : scores) s = -s;
  return ScoreMap(features.height(), features.width(), std::move(scores));
}

AnomalyResult build_result(const ScoreMap& raw, const PostprocessOptions& options) {
  require(!raw.empty(), ErrorCode::invalid_argument, "raw score map is empty");
  require(options.out_h >= 1 && options.out_w >= 1, ErrorCode::invalid_argument,
          "output resolution must be at least 1x1");
  AnomalyResult result;
  result.raw_map = raw;
  result.map = gaussian_filter(resize_bilinear(raw, options.out_h, options.out_w),
                               options.smoothing_sigma);
  result.image_score = options.score_after_smoothing ? result.map.max() : raw.max();
  return result;
}

std::vector<AnomalyResult> infer_batch(const ModelParams<float>& model,
                                       std::span<const HierarchyStack> stacks,
                                       const PipelineConfig& pipeline, const InferenceOptions& options) {
  require(model.finalized, ErrorCode::state, "model is not finalized for inference");
  pipeline.validate();
  std::vector<AnomalyResult> results(stacks.size());
  std::vector<std::exception_ptr> errors(stacks.size());

  auto run_one = [&](std::size_t i) {
    try {
      results[i] = build_result(score_features(model, extract_local_features(stacks[i], pipeline)),
                                options.post);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max<std::size_t>(1, std::min(threads, stacks.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < stacks.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < stacks.size(); i = next++) run_one(i);
      });
    }
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "sample " + std::to_string(i) + ": " + e.message());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::internal, "sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return results;
}

}  // namespace simplenet

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "simplenet/feature_pipeline.hpp"
#include "simplenet/model.hpp"
#include "simplenet/tensor.hpp"

namespace simplenet {

enum class LossKind : std::uint8_t { truncated_l1 = 0, cross_entropy = 1 };

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct TrainConfig {
  double th_pos = 0.5;
  double th_neg = -0.5;
  double lr_adaptor = 1e-4;
  double lr_discriminator = 2e-4;
  double weight_decay = 1e-5;
  std::size_t epochs = 160;
  std::size_t batch_size = 4;
  NoiseConfig noise;
  LossKind loss = LossKind::truncated_l1;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

template <typename T>
struct LossResult {
  T loss = T(0);
  std::vector<T> pos_grads;
  std::vector<T> neg_grads;
};

/// mean(max(0, th_pos - D(q))) + mean(max(0, D(q-) - th_neg)). With equal batch
/// sizes this is the per-location loss averaged over all locations. The
/// subgradient at a hinge kink is 0.
template <typename T>
LossResult<T> truncated_l1_loss(std::span<const T> pos_scores, std::span<const T> neg_scores,
                                T th_pos, T th_neg);

/// Binary cross-entropy with logits, positives labeled 1 and negatives 0,
/// averaged over all scores.
template <typename T>
LossResult<T> cross_entropy_loss(std::span<const T> pos_scores, std::span<const T> neg_scores);

template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

/// One Adam update over matching parameter/gradient lists. Weight decay is
/// added to the gradient (g += wd * p) before the moment updates. Moments are
/// sized lazily on the first call.
template <typename T>
void adam_step(std::span<const NamedSpan<T>> params, std::span<const NamedSpan<T>> grads,
               AdamState<T>& state, double lr, double weight_decay);

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double wall_ms = 0.0;
};

using ProgressSink = std::function<void(const EpochRecord&)>;

struct TrainResult {
  ModelParams<float> model;
  std::vector<EpochRecord> trace;
};

/// Optimizer state and noise position for a training run in progress.
struct Trainer {
  ModelParams<float> model;
  TrainConfig config;
  AdamState<float> adaptor_opt;
  AdamState<float> disc_opt;
  NoiseState noise_state;

  Trainer(ModelParams<float> initial, TrainConfig cfg);

  /// One optimization step on the stacked local features of a minibatch
  /// (rows = locations across the batch). Returns the step loss.
  double step(const Matrix<float>& batch_features);
};

/// Full training loop over precomputed local-feature maps (normal samples only).
TrainResult train(std::span<const FeatureTensor> local_features, ModelParams<float> initial,
                  const TrainConfig& config, const ProgressSink& progress = {});

/// Same, extracting local features once from backbone stacks first.
TrainResult train(std::span<const HierarchyStack> stacks, const PipelineConfig& pipeline,
                  ModelParams<float> initial, const TrainConfig& config,
                  const ProgressSink& progress = {});

}  // namespace simplenet

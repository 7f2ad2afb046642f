#include "simplenet/training.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "simplenet/error.hpp"
#include "simplenet/rng.hpp"

namespace simplenet {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::truncated_l1: return "trunc_l1";
    case LossKind::cross_entropy: return "ce";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "trunc_l1" || name == "truncated_l1") return LossKind::truncated_l1;
  if (name == "ce" || name == "cross_entropy") return LossKind::cross_entropy;
  fail(ErrorCode::config, "unknown loss kind '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  require(th_pos > 0.0 && th_neg < 0.0, ErrorCode::config, "thresholds must satisfy th_pos > 0 > th_neg");
  require(lr_adaptor > 0.0 && lr_discriminator > 0.0, ErrorCode::config, "learning rates must be positive");
  require(weight_decay >= 0.0, ErrorCode::config, "weight decay must be non-negative");
  require(epochs >= 1 && batch_size >= 1, ErrorCode::config, "epochs and batch size must be >= 1");
  noise.validate();
}

template <typename T>
LossResult<T> truncated_l1_loss(std::span<const T> pos, std::span<const T> neg, T th_pos, T th_neg) {
  require(!pos.empty() && !neg.empty(), ErrorCode::invalid_argument, "loss needs non-empty score batches");
  LossResult<T> r;
  r.pos_grads.assign(pos.size(), T(0));
  r.neg_grads.assign(neg.size(), T(0));
  const T inv_pos = T(1) / static_cast<T>(pos.size());
  const T inv_neg = T(1) / static_cast<T>(neg.size());
  double pos_sum = 0.0, neg_sum = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const T gap = th_pos - pos[i];
    if (gap > T(0)) {
      pos_sum += gap;
      r.pos_grads[i] = -inv_pos;
    }
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    const T gap = neg[i] - th_neg;
    if (gap > T(0)) {
      neg_sum += gap;
      r.neg_grads[i] = inv_neg;
    }
  }
  r.loss = static_cast<T>(pos_sum / static_cast<double>(pos.size()) +
                          neg_sum / static_cast<double>(neg.size()));
  return r;
}

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

template <typename T>
LossResult<T> cross_entropy_loss(std::span<const T> pos, std::span<const T> neg) {
  require(!pos.empty() && !neg.empty(), ErrorCode::invalid_argument, "loss needs non-empty score batches");
  LossResult<T> r;
  r.pos_grads.resize(pos.size());
  r.neg_grads.resize(neg.size());
  const double count = static_cast<double>(pos.size() + neg.size());
  double total = 0.0;
  // label 1: -log(sigmoid(s)) = softplus(-s); label 0: softplus(s).
  for (std::size_t i = 0; i < pos.size(); ++i) {
    total += softplus(-static_cast<double>(pos[i]));
    r.pos_grads[i] = static_cast<T>((sigmoid(pos[i]) - 1.0) / count);
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    total += softplus(static_cast<double>(neg[i]));
    r.neg_grads[i] = static_cast<T>(sigmoid(neg[i]) / count);
  }
  r.loss = static_cast<T>(total / count);
  return r;
}

template <typename T>
void adam_step(std::span<const NamedSpan<T>> params, std::span<const NamedSpan<T>> grads,
               AdamState<T>& state, double lr, double weight_decay) {
  require(params.size() == grads.size(), ErrorCode::shape_mismatch, "adam: parameter/gradient count differs");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.values.size(), T(0));
      state.second_moment.emplace_back(p.values.size(), T(0));
    }
  }
  require(state.first_moment.size() == params.size(), ErrorCode::shape_mismatch,
          "adam: state was built for a different parameter list");
  for (std::size_t t = 0; t < params.size(); ++t) {
    require(params[t].values.size() == grads[t].values.size() &&
                params[t].values.size() == state.first_moment[t].size(),
            ErrorCode::shape_mismatch,
            "adam: shape mismatch for " + std::string(params[t].name));
  }

  ++state.step;
  const double step = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, step);
  const double bias2 = 1.0 - std::pow(state.beta2, step);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t].values;
    auto g = grads[t].values;
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double grad = static_cast<double>(g[i]) + weight_decay * static_cast<double>(p[i]);
      const double m_new = state.beta1 * m[i] + (1.0 - state.beta1) * grad;
      const double v_new = state.beta2 * v[i] + (1.0 - state.beta2) * grad * grad;
      m[i] = static_cast<T>(m_new);
      v[i] = static_cast<T>(v_new);
      const double m_hat = m_new / bias1;
      const double v_hat = v_new / bias2;
      p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
  }
}

template LossResult<float> truncated_l1_loss(std::span<const float>, std::span<const float>, float, float);
template LossResult<double> truncated_l1_loss(std::span<const double>, std::span<const double>, double, double);
template LossResult<float> cross_entropy_loss(std::span<const float>, std::span<const float>);
template LossResult<double> cross_entropy_loss(std::span<const double>, std::span<const double>);
template void adam_step(std::span<const NamedSpan<float>>, std::span<const NamedSpan<float>>,
                        AdamState<float>&, double, double);
template void adam_step(std::span<const NamedSpan<double>>, std::span<const NamedSpan<double>>,
                        AdamState<double>&, double, double);

// ---------------------------------------------------------------------------

Trainer::Trainer(ModelParams<float> initial, TrainConfig cfg)
    : model(std::move(initial)), config(std::move(cfg)) {
  config.validate();
  model.validate();
  model.finalized = false;
}

double Trainer::step(const Matrix<float>& batch) {
  require(batch.cols == model.dim(), ErrorCode::shape_mismatch,
          "feature dimension " + std::to_string(batch.cols) + " does not match model dimension " +
              std::to_string(model.dim()));
  const Matrix<float> noise = draw_noise<float>(batch.rows, batch.cols, config.noise, noise_state);
  auto forward = head_forward_train(model, batch, noise);

  const std::size_t n = batch.rows;
  std::span<const float> scores(forward.scores);
  LossResult<float> loss = config.loss == LossKind::truncated_l1
                               ? truncated_l1_loss<float>(scores.first(n), scores.subspan(n),
                                                          static_cast<float>(config.th_pos),
                                                          static_cast<float>(config.th_neg))
                               : cross_entropy_loss<float>(scores.first(n), scores.subspan(n));
  std::vector<float> score_grads = loss.pos_grads;
  score_grads.insert(score_grads.end(), loss.neg_grads.begin(), loss.neg_grads.end());

  auto grads = head_backward(model.adaptor, model.discriminator, forward.cache,
                             std::span<const float>(score_grads));

  if (model.adaptor.variant != AdaptorVariant::identity) {
    auto p = trainable_parameters(model.adaptor);
    auto g = gradient_views(grads.adaptor, model.adaptor.variant);
    adam_step<float>(p, g, adaptor_opt, config.lr_adaptor, config.weight_decay);
    ++model.adaptor.revision;
  }
  auto p = trainable_parameters(model.discriminator);
  auto g = gradient_views(grads.discriminator);
  adam_step<float>(p, g, disc_opt, config.lr_discriminator, config.weight_decay);
  ++model.discriminator.revision;
  return loss.loss;
}

TrainResult train(std::span<const FeatureTensor> local_features, ModelParams<float> initial,
                  const TrainConfig& config, const ProgressSink& progress) {
  require(!local_features.empty(), ErrorCode::invalid_argument, "training set is empty");
  for (const auto& f : local_features) {
    require(f.channels() == initial.dim(), ErrorCode::shape_mismatch,
            "feature dimension " + std::to_string(f.channels()) + " does not match model dimension " +
                std::to_string(initial.dim()));
  }

  Trainer trainer(std::move(initial), config);
  RandomStream shuffle_rng(config.seed, StreamId::shuffle);
  TrainResult result;
  const std::size_t C = trainer.model.dim();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto order = shuffled_indices(local_features.size(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + config.batch_size);
      std::size_t rows = 0;
      for (std::size_t i = b0; i < b1; ++i) rows += local_features[order[i]].locations();
      Matrix<float> batch(rows, C);
      auto dst = batch.data.begin();
      for (std::size_t i = b0; i < b1; ++i) {
        auto src = local_features[order[i]].data();
        dst = std::copy(src.begin(), src.end(), dst);
      }
      loss_sum += trainer.step(batch);
      ++batches;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    EpochRecord record{epoch, loss_sum / static_cast<double>(batches),
                       std::chrono::duration<double, std::milli>(elapsed).count()};
    result.trace.push_back(record);
    if (progress) progress(record);
  }

  result.model = std::move(trainer.model);
  result.model.finalized = true;
  return result;
}

TrainResult train(std::span<const HierarchyStack> stacks, const PipelineConfig& pipeline,
                  ModelParams<float> initial, const TrainConfig& config, const ProgressSink& progress) {
  std::vector<FeatureTensor> features;
  features.reserve(stacks.size());
  for (const auto& s : stacks) features.push_back(extract_local_features(s, pipeline));
  return train(features, std::move(initial), config, progress);
}

}  // namespace simplenet

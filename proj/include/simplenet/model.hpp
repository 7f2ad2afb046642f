#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "simplenet/linalg.hpp"

namespace simplenet {

enum class AdaptorVariant : std::uint8_t {
  identity = 0,  // frozen pass-through
  linear = 1,    // q = o * W, no bias
  mlp = 2,       // q = leaky(o * W) * W2
};

std::string_view to_string(AdaptorVariant variant);
AdaptorVariant parse_adaptor_variant(std::string_view name);

enum class ForwardMode { train, eval };

template <typename T>
struct AdaptorParams {
  AdaptorVariant variant = AdaptorVariant::linear;
  Matrix<T> weight;   // C x C
  Matrix<T> weight2;  // C x C, mlp only
  T leaky_slope = T(0.2);
  std::uint64_t revision = 0;

  std::size_t dim() const noexcept { return weight.rows; }
  void validate() const;
};

/// linear(C -> Hd) -> batch-norm -> leaky relu -> linear(Hd -> 1).
template <typename T>
struct DiscriminatorParams {
  Matrix<T> w1;  // C x Hd
  std::vector<T> b1;
  std::vector<T> bn_gamma;
  std::vector<T> bn_beta;
  std::vector<T> bn_running_mean;
  std::vector<T> bn_running_var;
  std::vector<T> w2;  // Hd
  T b2 = T(0);
  T leaky_slope = T(0.2);
  T bn_momentum = T(0.1);
  T bn_eps = T(1e-5);
  std::uint64_t revision = 0;

  std::size_t input_dim() const noexcept { return w1.rows; }
  std::size_t hidden_dim() const noexcept { return w1.cols; }
  void validate() const;
};

template <typename T>
struct ModelParams {
  AdaptorParams<T> adaptor;
  DiscriminatorParams<T> discriminator;
  /// Set once training is done; inference refuses unfinalized models.
  bool finalized = false;

  std::size_t dim() const noexcept { return adaptor.dim(); }
  void validate() const;
};

/// Identity adaptor weights (every variant); discriminator weights uniform in
/// +-1/sqrt(fan_in), zero biases, gamma 1, beta 0, running mean 0, var 1.
ModelParams<float> init_model(std::size_t channels, std::size_t hidden, AdaptorVariant variant,
                              std::uint64_t seed);

template <typename U, typename T>
ModelParams<U> model_cast(const ModelParams<T>& model);

struct NoiseConfig {
  double mean = 0.0;
  double sigma = 0.015;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

/// Position within the noise stream; every call to generate_anomalous advances it.
struct NoiseState {
  std::uint64_t next_block = 0;
};

// ---------------------------------------------------------------------------
// Forward passes

template <typename T>
struct AdaptorCache {
  AdaptorVariant variant = AdaptorVariant::identity;
  Matrix<T> input;
  Matrix<T> hidden_pre;  // mlp only
  Matrix<T> hidden;      // mlp only
  std::uint64_t revision = 0;
};

template <typename T>
Matrix<T> adaptor_forward(const AdaptorParams<T>& params, const Matrix<T>& features,
                          AdaptorCache<T>* cache = nullptr);

/// rows x cols i.i.d. N(mean, sigma^2) draws; advances `state`.
template <typename T>
Matrix<T> draw_noise(std::size_t rows, std::size_t cols, const NoiseConfig& noise, NoiseState& state);

/// features + eps with eps ~ N(mean, sigma^2) i.i.d. per entry.
template <typename T>
Matrix<T> generate_anomalous(const Matrix<T>& features, const NoiseConfig& noise, NoiseState& state);

template <typename T>
struct DiscriminatorCache {
  ForwardMode mode = ForwardMode::eval;
  Matrix<T> input;
  Matrix<T> normalized;  // (h - mean) * inv_std
  Matrix<T> bn_out;      // gamma * normalized + beta
  Matrix<T> activated;
  std::vector<T> inv_std;
  std::uint64_t revision = 0;
};

template <typename T>
struct DiscriminatorOutput {
  std::vector<T> scores;
  DiscriminatorCache<T> cache;
};

/// Train mode normalizes with batch statistics (batch >= 2) and updates the
/// running statistics; eval mode uses the running statistics.
template <typename T>
DiscriminatorOutput<T> discriminator_forward(DiscriminatorParams<T>& params,
                                             const Matrix<T>& features, ForwardMode mode);

/// Eval-mode scores. Each row is scored independently of the others.
template <typename T>
std::vector<T> discriminator_scores(const DiscriminatorParams<T>& params, const Matrix<T>& features);

// ---------------------------------------------------------------------------
// Joint train-mode forward and backward

/// Caches for one training step: adaptor on the N normal vectors, then one
/// discriminator pass over the 2N rows [q; q + noise].
template <typename T>
struct HeadCache {
  AdaptorCache<T> adaptor;
  DiscriminatorCache<T> discriminator;
  std::size_t normal_count = 0;
};

template <typename T>
struct HeadForward {
  std::vector<T> scores;  // first N: D(q), last N: D(q + eps)
  HeadCache<T> cache;
};

template <typename T>
HeadForward<T> head_forward_train(ModelParams<T>& model, const Matrix<T>& local_features,
                                  const Matrix<T>& noise);

template <typename T>
struct AdaptorGrads {
  Matrix<T> weight;
  Matrix<T> weight2;
};

template <typename T>
struct DiscriminatorGrads {
  Matrix<T> w1;
  std::vector<T> b1;
  std::vector<T> bn_gamma;
  std::vector<T> bn_beta;
  std::vector<T> w2;
  T b2 = T(0);
};

template <typename T>
struct HeadGrads {
  AdaptorGrads<T> adaptor;
  DiscriminatorGrads<T> discriminator;
};

/// Exact gradients of a scalar loss with respect to every trainable parameter,
/// given dLoss/dScore for each of the 2N scores. Gradients from both branches
/// reach the shared adaptor; the noise is a constant.
template <typename T>
HeadGrads<T> head_backward(const AdaptorParams<T>& adaptor, const DiscriminatorParams<T>& disc,
                           const HeadCache<T>& cache, std::span<const T> loss_grads);

// ---------------------------------------------------------------------------
// Flat parameter views, in a fixed order shared by params and grads.

template <typename T>
struct NamedSpan {
  std::string_view name;
  std::span<T> values;
};

template <typename T>
std::vector<NamedSpan<T>> trainable_parameters(AdaptorParams<T>& params);
template <typename T>
std::vector<NamedSpan<T>> trainable_parameters(DiscriminatorParams<T>& params);
template <typename T>
std::vector<NamedSpan<T>> gradient_views(AdaptorGrads<T>& grads, AdaptorVariant variant);
template <typename T>
std::vector<NamedSpan<T>> gradient_views(DiscriminatorGrads<T>& grads);

/// Rows of a H x W x C feature tensor as an (H*W) x C matrix (copy).
template <typename T>
Matrix<T> as_rows(std::span<const float> data, std::size_t rows, std::size_t cols);

}  // namespace simplenet

#include "simplenet/model.hpp"

#include <cmath>
#include <string>

#include "simplenet/error.hpp"
#include "simplenet/rng.hpp"

namespace simplenet {

std::string_view to_string(AdaptorVariant variant) {
  switch (variant) {
    case AdaptorVariant::identity: return "identity";
    case AdaptorVariant::linear: return "linear";
    case AdaptorVariant::mlp: return "mlp";
  }
  return "unknown";
}

AdaptorVariant parse_adaptor_variant(std::string_view name) {
  if (name == "identity") return AdaptorVariant::identity;
  if (name == "linear") return AdaptorVariant::linear;
  if (name == "mlp") return AdaptorVariant::mlp;
  fail(ErrorCode::config, "unknown adaptor variant '" + std::string(name) + "'");
}

namespace {

template <typename T>
bool finite(std::span<const T> values) {
  for (T v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
T leaky(T x, T slope) {
  return x > T(0) ? x : slope * x;
}

template <typename T>
T leaky_grad(T x, T slope) {
  return x > T(0) ? T(1) : slope;
}

template <typename T>
Matrix<T> apply_leaky(const Matrix<T>& m, T slope) {
  Matrix<T> out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = leaky(m.data[i], slope);
  return out;
}

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

template <typename T>
void AdaptorParams<T>::validate() const {
  require(weight.rows == weight.cols && weight.rows > 0, ErrorCode::shape_mismatch,
          "adaptor weight must be square and non-empty, got " + dims(weight.rows, weight.cols));
  require(finite<T>(weight.data), ErrorCode::invalid_argument, "adaptor weight has non-finite entries");
  if (variant == AdaptorVariant::mlp) {
    require(weight2.rows == weight.rows && weight2.cols == weight.cols, ErrorCode::shape_mismatch,
            "mlp adaptor second weight must match the first");
    require(finite<T>(weight2.data), ErrorCode::invalid_argument,
            "adaptor weight2 has non-finite entries");
  }
}

template <typename T>
void DiscriminatorParams<T>::validate() const {
  const std::size_t hd = hidden_dim();
  require(w1.rows > 0 && hd > 0, ErrorCode::shape_mismatch, "discriminator needs C >= 1 and Hd >= 1");
  for (const auto* v : {&b1, &bn_gamma, &bn_beta, &bn_running_mean, &bn_running_var, &w2}) {
    require(v->size() == hd, ErrorCode::shape_mismatch, "discriminator vector length != Hd");
    require(finite<T>(*v), ErrorCode::invalid_argument, "discriminator has non-finite parameters");
  }
  require(finite<T>(w1.data) && std::isfinite(b2), ErrorCode::invalid_argument,
          "discriminator has non-finite parameters");
  for (T v : bn_running_var) {
    require(v > T(0), ErrorCode::invalid_argument, "batch-norm running variance must be positive");
  }
  require(bn_eps > T(0) && bn_momentum >= T(0) && bn_momentum <= T(1), ErrorCode::invalid_argument,
          "batch-norm eps must be > 0 and momentum in [0, 1]");
}

template <typename T>
void ModelParams<T>::validate() const {
  adaptor.validate();
  discriminator.validate();
  require(discriminator.input_dim() == adaptor.dim(), ErrorCode::shape_mismatch,
          "adaptor output dim " + std::to_string(adaptor.dim()) + " != discriminator input dim " +
              std::to_string(discriminator.input_dim()));
}

ModelParams<float> init_model(std::size_t channels, std::size_t hidden, AdaptorVariant variant,
                              std::uint64_t seed) {
  require(channels >= 1 && hidden >= 1, ErrorCode::config, "model needs channels >= 1 and hidden >= 1");
  ModelParams<float> model;
  model.adaptor.variant = variant;
  model.adaptor.weight = Matrix<float>::identity(channels);
  if (variant == AdaptorVariant::mlp) model.adaptor.weight2 = Matrix<float>::identity(channels);

  auto& d = model.discriminator;
  RandomStream rng(seed, StreamId::init);
  d.w1 = Matrix<float>(channels, hidden);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(channels));
  for (auto& v : d.w1.data) v = static_cast<float>(rng.uniform(-bound1, bound1));
  d.b1.assign(hidden, 0.0f);
  d.bn_gamma.assign(hidden, 1.0f);
  d.bn_beta.assign(hidden, 0.0f);
  d.bn_running_mean.assign(hidden, 0.0f);
  d.bn_running_var.assign(hidden, 1.0f);
  d.w2.resize(hidden);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& v : d.w2) v = static_cast<float>(rng.uniform(-bound2, bound2));
  d.b2 = 0.0f;
  return model;
}

template <typename U, typename T>
ModelParams<U> model_cast(const ModelParams<T>& m) {
  auto vec = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
  ModelParams<U> out;
  out.adaptor.variant = m.adaptor.variant;
  out.adaptor.weight = matrix_cast<U>(m.adaptor.weight);
  out.adaptor.weight2 = matrix_cast<U>(m.adaptor.weight2);
  out.adaptor.leaky_slope = static_cast<U>(m.adaptor.leaky_slope);
  out.adaptor.revision = m.adaptor.revision;
  const auto& d = m.discriminator;
  auto& o = out.discriminator;
  o.w1 = matrix_cast<U>(d.w1);
  o.b1 = vec(d.b1);
  o.bn_gamma = vec(d.bn_gamma);
  o.bn_beta = vec(d.bn_beta);
  o.bn_running_mean = vec(d.bn_running_mean);
  o.bn_running_var = vec(d.bn_running_var);
  o.w2 = vec(d.w2);
  o.b2 = static_cast<U>(d.b2);
  o.leaky_slope = static_cast<U>(d.leaky_slope);
  o.bn_momentum = static_cast<U>(d.bn_momentum);
  o.bn_eps = static_cast<U>(d.bn_eps);
  o.revision = d.revision;
  out.finalized = m.finalized;
  return out;
}

void NoiseConfig::validate() const {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::config, "noise sigma must be positive");
  require(std::isfinite(mean), ErrorCode::config, "noise mean must be finite");
}

// ---------------------------------------------------------------------------

template <typename T>
Matrix<T> adaptor_forward(const AdaptorParams<T>& params, const Matrix<T>& features,
                          AdaptorCache<T>* cache) {
  require(features.cols == params.dim(), ErrorCode::shape_mismatch,
          "adaptor expects " + std::to_string(params.dim()) + " channels, got " +
              std::to_string(features.cols));
  Matrix<T> out;
  Matrix<T> hidden_pre, hidden;
  switch (params.variant) {
    case AdaptorVariant::identity:
      out = features;
      break;
    case AdaptorVariant::linear:
      out = matmul(features, params.weight);
      break;
    case AdaptorVariant::mlp:
      hidden_pre = matmul(features, params.weight);
      hidden = apply_leaky(hidden_pre, params.leaky_slope);
      out = matmul(hidden, params.weight2);
      break;
  }
  if (cache != nullptr) {
    cache->variant = params.variant;
    cache->input = features;
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden = std::move(hidden);
    cache->revision = params.revision;
  }
  return out;
}

template <typename T>
Matrix<T> draw_noise(std::size_t rows, std::size_t cols, const NoiseConfig& noise, NoiseState& state) {
  noise.validate();
  Matrix<T> eps(rows, cols);
  state.next_block += fill_gaussian<T>(eps.data, noise.mean, noise.sigma, noise.seed,
                                       StreamId::noise, state.next_block);
  return eps;
}

template <typename T>
Matrix<T> generate_anomalous(const Matrix<T>& features, const NoiseConfig& noise, NoiseState& state) {
  Matrix<T> out = draw_noise<T>(features.rows, features.cols, noise, state);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += features.data[i];
  return out;
}

namespace {

// h = x * w1 + b1
template <typename T>
Matrix<T> hidden_pre(const DiscriminatorParams<T>& p, const Matrix<T>& x) {
  Matrix<T> h = matmul(x, p.w1);
  for (std::size_t i = 0; i < h.rows; ++i) {
    auto row = h.row(i);
    for (std::size_t j = 0; j < h.cols; ++j) row[j] += p.b1[j];
  }
  return h;
}

// s = a * w2 + b2, reduced in ascending hidden order.
template <typename T>
std::vector<T> output_layer(const DiscriminatorParams<T>& p, const Matrix<T>& activated) {
  std::vector<T> scores(activated.rows);
  for (std::size_t i = 0; i < activated.rows; ++i) {
    auto row = activated.row(i);
    T acc = T(0);
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * p.w2[j];
    scores[i] = acc + p.b2;
  }
  return scores;
}

}  // namespace

template <typename T>
std::vector<T> discriminator_scores(const DiscriminatorParams<T>& params, const Matrix<T>& features) {
  require(features.cols == params.input_dim(), ErrorCode::shape_mismatch,
          "discriminator expects " + std::to_string(params.input_dim()) + " channels, got " +
              std::to_string(features.cols));
  require(features.rows > 0, ErrorCode::invalid_argument, "discriminator batch is empty");
  const std::size_t hd = params.hidden_dim();
  std::vector<T> scale(hd), shift(hd);
  for (std::size_t j = 0; j < hd; ++j) {
    scale[j] = params.bn_gamma[j] / std::sqrt(params.bn_running_var[j] + params.bn_eps);
    shift[j] = params.bn_beta[j];
  }
  Matrix<T> a = hidden_pre(params, features);
  for (std::size_t i = 0; i < a.rows; ++i) {
    auto row = a.row(i);
    for (std::size_t j = 0; j < hd; ++j) {
      row[j] = leaky((row[j] - params.bn_running_mean[j]) * scale[j] + shift[j], params.leaky_slope);
    }
  }
  return output_layer(params, a);
}

template <typename T>
DiscriminatorOutput<T> discriminator_forward(DiscriminatorParams<T>& params, const Matrix<T>& features,
                                             ForwardMode mode) {
  if (mode == ForwardMode::eval) {
    DiscriminatorOutput<T> out;
    out.scores = discriminator_scores(params, features);
    out.cache.mode = ForwardMode::eval;
    out.cache.revision = params.revision;
    return out;
  }

  require(features.cols == params.input_dim(), ErrorCode::shape_mismatch,
          "discriminator expects " + std::to_string(params.input_dim()) + " channels, got " +
              std::to_string(features.cols));
  require(features.rows >= 2, ErrorCode::invalid_argument,
          "train-mode batch norm needs at least 2 vectors, got " + std::to_string(features.rows));

  const std::size_t n = features.rows, hd = params.hidden_dim();
  DiscriminatorOutput<T> out;
  auto& c = out.cache;
  c.mode = ForwardMode::train;
  c.revision = params.revision;
  c.input = features;

  Matrix<T> h = hidden_pre(params, features);
  std::vector<double> mean(hd, 0.0), var(hd, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = h.row(i);
    for (std::size_t j = 0; j < hd; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = h.row(i);
    for (std::size_t j = 0; j < hd; ++j) {
      const double d = static_cast<double>(row[j]) - mean[j];
      var[j] += d * d;
    }
  }
  for (auto& v : var) v /= static_cast<double>(n);

  c.inv_std.resize(hd);
  std::vector<T> mean_t(hd);
  for (std::size_t j = 0; j < hd; ++j) {
    mean_t[j] = static_cast<T>(mean[j]);
    c.inv_std[j] = static_cast<T>(1.0 / std::sqrt(var[j] + static_cast<double>(params.bn_eps)));
  }

  c.normalized = Matrix<T>(n, hd);
  c.bn_out = Matrix<T>(n, hd);
  c.activated = Matrix<T>(n, hd);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < hd; ++j) {
      const T xhat = (h(i, j) - mean_t[j]) * c.inv_std[j];
      const T y = params.bn_gamma[j] * xhat + params.bn_beta[j];
      c.normalized(i, j) = xhat;
      c.bn_out(i, j) = y;
      c.activated(i, j) = leaky(y, params.leaky_slope);
    }
  }
  out.scores = output_layer(params, c.activated);

  // Running statistics use the unbiased batch variance.
  const T m = params.bn_momentum;
  const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < hd; ++j) {
    params.bn_running_mean[j] = (T(1) - m) * params.bn_running_mean[j] + m * mean_t[j];
    params.bn_running_var[j] =
        (T(1) - m) * params.bn_running_var[j] + m * static_cast<T>(var[j] * unbias);
  }
  return out;
}

template <typename T>
HeadForward<T> head_forward_train(ModelParams<T>& model, const Matrix<T>& local_features,
                                  const Matrix<T>& noise) {
  require(noise.rows == local_features.rows && noise.cols == local_features.cols,
          ErrorCode::shape_mismatch, "noise must match the feature batch shape");
  HeadForward<T> out;
  out.cache.normal_count = local_features.rows;
  Matrix<T> q = adaptor_forward(model.adaptor, local_features, &out.cache.adaptor);
  Matrix<T> q_neg = q;
  for (std::size_t i = 0; i < q_neg.data.size(); ++i) q_neg.data[i] += noise.data[i];
  auto disc = discriminator_forward(model.discriminator, vstack(q, q_neg), ForwardMode::train);
  out.scores = std::move(disc.scores);
  out.cache.discriminator = std::move(disc.cache);
  return out;
}

template <typename T>
HeadGrads<T> head_backward(const AdaptorParams<T>& adaptor, const DiscriminatorParams<T>& disc,
                           const HeadCache<T>& cache, std::span<const T> loss_grads) {
  const auto& dc = cache.discriminator;
  const auto& ac = cache.adaptor;
  const std::size_t n = dc.input.rows, hd = disc.hidden_dim();
  require(dc.mode == ForwardMode::train, ErrorCode::internal,
          "head_backward needs a train-mode discriminator cache");
  require(dc.revision == disc.revision && ac.revision == adaptor.revision, ErrorCode::internal,
          "stale cache: parameters changed since the forward pass");
  require(ac.variant == adaptor.variant, ErrorCode::internal, "cache adaptor variant mismatch");
  require(n == 2 * cache.normal_count && ac.input.rows == cache.normal_count, ErrorCode::internal,
          "cache batch layout mismatch");
  require(dc.activated.cols == hd && dc.input.cols == disc.input_dim(), ErrorCode::internal,
          "cache shape does not match discriminator parameters");
  require(loss_grads.size() == n, ErrorCode::shape_mismatch,
          "expected " + std::to_string(n) + " loss gradients, got " + std::to_string(loss_grads.size()));

  HeadGrads<T> grads;
  auto& g = grads.discriminator;

  // Output layer.
  g.w2.assign(hd, T(0));
  g.b2 = T(0);
  Matrix<T> d_bn(n, hd);
  for (std::size_t i = 0; i < n; ++i) {
    const T ds = loss_grads[i];
    g.b2 += ds;
    for (std::size_t j = 0; j < hd; ++j) {
      g.w2[j] += ds * dc.activated(i, j);
      d_bn(i, j) = ds * disc.w2[j] * leaky_grad(dc.bn_out(i, j), disc.leaky_slope);
    }
  }

  // Batch norm with batch statistics:
  // dh = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat)).
  g.bn_gamma.assign(hd, T(0));
  g.bn_beta.assign(hd, T(0));
  std::vector<T> sum_dxhat(hd, T(0)), sum_dxhat_xhat(hd, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < hd; ++j) {
      const T dy = d_bn(i, j);
      const T xhat = dc.normalized(i, j);
      g.bn_gamma[j] += dy * xhat;
      g.bn_beta[j] += dy;
      const T dxhat = dy * disc.bn_gamma[j];
      sum_dxhat[j] += dxhat;
      sum_dxhat_xhat[j] += dxhat * xhat;
    }
  }
  const T count = static_cast<T>(n);
  Matrix<T> d_hidden(n, hd);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < hd; ++j) {
      const T dxhat = d_bn(i, j) * disc.bn_gamma[j];
      d_hidden(i, j) = dc.inv_std[j] / count *
                       (count * dxhat - sum_dxhat[j] - dc.normalized(i, j) * sum_dxhat_xhat[j]);
    }
  }

  // First linear layer.
  g.b1.assign(hd, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < hd; ++j) g.b1[j] += d_hidden(i, j);
  }
  g.w1 = matmul_tn(dc.input, d_hidden);
  if (adaptor.variant == AdaptorVariant::identity) return grads;

  Matrix<T> d_input = matmul_nt(d_hidden, disc.w1);  // 2N x C
  const std::size_t half = cache.normal_count;
  Matrix<T> d_q(half, d_input.cols);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t c = 0; c < d_input.cols; ++c) d_q(i, c) = d_input(i, c) + d_input(i + half, c);
  }

  if (adaptor.variant == AdaptorVariant::linear) {
    grads.adaptor.weight = matmul_tn(ac.input, d_q);
  } else {
    grads.adaptor.weight2 = matmul_tn(ac.hidden, d_q);
    Matrix<T> d_hid = matmul_nt(d_q, adaptor.weight2);
    for (std::size_t i = 0; i < d_hid.data.size(); ++i) {
      d_hid.data[i] *= leaky_grad(ac.hidden_pre.data[i], adaptor.leaky_slope);
    }
    grads.adaptor.weight = matmul_tn(ac.input, d_hid);
  }
  return grads;
}

template <typename T>
std::vector<NamedSpan<T>> trainable_parameters(AdaptorParams<T>& p) {
  switch (p.variant) {
    case AdaptorVariant::identity: return {};
    case AdaptorVariant::linear: return {{"adaptor.weight", p.weight.data}};
    case AdaptorVariant::mlp:
      return {{"adaptor.weight", p.weight.data}, {"adaptor.weight2", p.weight2.data}};
  }
  return {};
}

template <typename T>
std::vector<NamedSpan<T>> trainable_parameters(DiscriminatorParams<T>& p) {
  return {{"disc.w1", p.w1.data},         {"disc.b1", p.b1},   {"disc.bn_gamma", p.bn_gamma},
          {"disc.bn_beta", p.bn_beta},    {"disc.w2", p.w2},   {"disc.b2", std::span<T>(&p.b2, 1)}};
}

template <typename T>
std::vector<NamedSpan<T>> gradient_views(AdaptorGrads<T>& g, AdaptorVariant variant) {
  switch (variant) {
    case AdaptorVariant::identity: return {};
    case AdaptorVariant::linear: return {{"adaptor.weight", g.weight.data}};
    case AdaptorVariant::mlp:
      return {{"adaptor.weight", g.weight.data}, {"adaptor.weight2", g.weight2.data}};
  }
  return {};
}

template <typename T>
std::vector<NamedSpan<T>> gradient_views(DiscriminatorGrads<T>& g) {
  return {{"disc.w1", g.w1.data},           {"disc.b1", g.b1},   {"disc.bn_gamma", g.bn_gamma},
          {"disc.bn_beta", g.bn_beta},      {"disc.w2", g.w2},   {"disc.b2", std::span<T>(&g.b2, 1)}};
}

template <typename T>
Matrix<T> as_rows(std::span<const float> data, std::size_t rows, std::size_t cols) {
  require(data.size() == rows * cols, ErrorCode::shape_mismatch, "as_rows: size mismatch");
  return Matrix<T>(rows, cols, std::vector<T>(data.begin(), data.end()));
}

#define SIMPLENET_INSTANTIATE(T)                                                                  \
  template struct AdaptorParams<T>;                                                               \
  template struct DiscriminatorParams<T>;                                                         \
  template struct ModelParams<T>;                                                                 \
  template Matrix<T> adaptor_forward(const AdaptorParams<T>&, const Matrix<T>&, AdaptorCache<T>*); \
  template Matrix<T> draw_noise<T>(std::size_t, std::size_t, const NoiseConfig&, NoiseState&);    \
  template Matrix<T> generate_anomalous(const Matrix<T>&, const NoiseConfig&, NoiseState&);       \
  template std::vector<T> discriminator_scores(const DiscriminatorParams<T>&, const Matrix<T>&);  \
  template DiscriminatorOutput<T> discriminator_forward(DiscriminatorParams<T>&, const Matrix<T>&, \
                                                        ForwardMode);                             \
  template HeadForward<T> head_forward_train(ModelParams<T>&, const Matrix<T>&, const Matrix<T>&); \
  template HeadGrads<T> head_backward(const AdaptorParams<T>&, const DiscriminatorParams<T>&,     \
                                      const HeadCache<T>&, std::span<const T>);                   \
  template std::vector<NamedSpan<T>> trainable_parameters(AdaptorParams<T>&);                     \
  template std::vector<NamedSpan<T>> trainable_parameters(DiscriminatorParams<T>&);               \
  template std::vector<NamedSpan<T>> gradient_views(AdaptorGrads<T>&, AdaptorVariant);            \
  template std::vector<NamedSpan<T>> gradient_views(DiscriminatorGrads<T>&);                      \
  template Matrix<T> as_rows<T>(std::span<const float>, std::size_t, std::size_t);

SIMPLENET_INSTANTIATE(float)
SIMPLENET_INSTANTIATE(double)

#undef SIMPLENET_INSTANTIATE

template ModelParams<double> model_cast<double, float>(const ModelParams<float>&);
template ModelParams<float> model_cast<float, double>(const ModelParams<double>&);
template ModelParams<float> model_cast<float, float>(const ModelParams<float>&);

}  // namespace simplenet

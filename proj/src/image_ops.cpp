#include "simplenet/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simplenet/error.hpp"

namespace simplenet {

FeatureTensor aggregate_neighborhood(const FeatureTensor& map, std::size_t patch_size) {
  require(patch_size % 2 == 1, ErrorCode::invalid_argument,
          "patch size must be odd and positive, got " + std::to_string(patch_size));
  require(!map.empty(), ErrorCode::invalid_argument, "cannot aggregate an empty map");

  const std::size_t H = map.height(), W = map.width(), C = map.channels();
  const std::size_t half = patch_size / 2;
  FeatureTensor out(H, W, C);
  std::vector<double> acc(C);

  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t h0 = h >= half ? h - half : 0;
    const std::size_t h1 = std::min(H - 1, h + half);
    for (std::size_t w = 0; w < W; ++w) {
      const std::size_t w0 = w >= half ? w - half : 0;
      const std::size_t w1 = std::min(W - 1, w + half);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t y = h0; y <= h1; ++y) {
        for (std::size_t x = w0; x <= w1; ++x) {
          auto src = map.pixel(y, x);
          for (std::size_t c = 0; c < C; ++c) acc[c] += src[c];
        }
      }
      const double count = static_cast<double>((h1 - h0 + 1) * (w1 - w0 + 1));
      auto dst = out.pixel(h, w);
      for (std::size_t c = 0; c < C; ++c) dst[c] = static_cast<float>(acc[c] / count);
    }
  }
  return out;
}

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;  // weight of `hi`
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    auto lo = static_cast<std::size_t>(src);
    if (lo > in - 1) lo = in - 1;
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

FeatureTensor resize_bilinear(const FeatureTensor& map, std::size_t out_h, std::size_t out_w) {
  require(out_h >= 1 && out_w >= 1, ErrorCode::invalid_argument,
          "resize target must be at least 1x1");
  require(!map.empty(), ErrorCode::invalid_argument, "cannot resize an empty map");
  if (out_h == map.height() && out_w == map.width()) return map;

  const std::size_t C = map.channels();
  const auto rows = bilinear_taps(map.height(), out_h);
  const auto cols = bilinear_taps(map.width(), out_w);
  FeatureTensor out(out_h, out_w, C);

  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap& ty = rows[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap& tx = cols[x];
      auto p00 = map.pixel(ty.lo, tx.lo);
      auto p01 = map.pixel(ty.lo, tx.hi);
      auto p10 = map.pixel(ty.hi, tx.lo);
      auto p11 = map.pixel(ty.hi, tx.hi);
      const double w00 = (1.0 - ty.frac) * (1.0 - tx.frac);
      const double w01 = (1.0 - ty.frac) * tx.frac;
      const double w10 = ty.frac * (1.0 - tx.frac);
      const double w11 = ty.frac * tx.frac;
      auto dst = out.pixel(y, x);
      for (std::size_t c = 0; c < C; ++c) {
        dst[c] = static_cast<float>(w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c]);
      }
    }
  }
  return out;
}

ScoreMap resize_bilinear(const ScoreMap& map, std::size_t out_h, std::size_t out_w) {
  return as_score_map(resize_bilinear(as_tensor(map), out_h, out_w));
}

FeatureTensor concat_channels(std::span<const FeatureTensor> maps) {
  require(!maps.empty(), ErrorCode::invalid_argument, "concat_channels needs at least one map");
  const std::size_t H = maps.front().height(), W = maps.front().width();
  std::size_t total = 0;
  for (const auto& m : maps) {
    require(m.height() == H && m.width() == W, ErrorCode::shape_mismatch,
            "concat_channels spatial mismatch: " + std::to_string(m.height()) + "x" +
                std::to_string(m.width()) + " vs " + std::to_string(H) + "x" + std::to_string(W));
    total += m.channels();
  }
  if (maps.size() == 1) return maps.front();

  FeatureTensor out(H, W, total);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t w = 0; w < W; ++w) {
      auto dst = out.pixel(h, w).begin();
      for (const auto& m : maps) dst = std::copy_n(m.pixel(h, w).begin(), m.channels(), dst);
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::invalid_argument,
          "gaussian sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double x = static_cast<double>(i);
    const double v = std::exp(-(x * x) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

std::size_t reflect_index(std::ptrdiff_t index, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = index % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

ScoreMap gaussian_filter(const ScoreMap& map, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  require(!map.empty(), ErrorCode::invalid_argument, "cannot filter an empty map");
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const std::size_t H = map.height(), W = map.width();

  // Along rows (horizontal pass) into a double buffer, then along columns.
  std::vector<double> tmp(H * W);
  std::vector<std::size_t> col_index(W * kernel.size());
  for (std::size_t x = 0; x < W; ++x) {
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      col_index[x * kernel.size() + static_cast<std::size_t>(k + radius)] =
          reflect_index(static_cast<std::ptrdiff_t>(x) + k, W);
    }
  }
  for (std::size_t y = 0; y < H; ++y) {
    const float* row = map.data().data() + y * W;
    for (std::size_t x = 0; x < W; ++x) {
      const std::size_t* idx = &col_index[x * kernel.size()];
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * row[idx[k]];
      tmp[y * W + x] = acc;
    }
  }

  ScoreMap out(H, W);
  std::vector<double> acc(W);
  for (std::size_t y = 0; y < H; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const double weight = kernel[static_cast<std::size_t>(k + radius)];
      const double* src = tmp.data() + reflect_index(static_cast<std::ptrdiff_t>(y) + k, H) * W;
      for (std::size_t x = 0; x < W; ++x) acc[x] += weight * src[x];
    }
    for (std::size_t x = 0; x < W; ++x) out.at(y, x) = static_cast<float>(acc[x]);
  }
  return out;
}

}  // namespace simplenet

#pragma once

// Slow reference implementations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "simplenet/evaluation.hpp"
#include "simplenet/tensor.hpp"

namespace oracles {

using simplenet::FeatureTensor;
using simplenet::LabeledScores;
using simplenet::ScoreMap;

// Naive clipped-window mean: enumerate every in-bounds neighbor.
inline FeatureTensor naive_aggregate(const FeatureTensor& in, std::size_t p) {
  const long r = static_cast<long>(p / 2);
  const long H = static_cast<long>(in.height()), W = static_cast<long>(in.width());
  FeatureTensor out(in.height(), in.width(), in.channels());
  for (long h = 0; h < H; ++h) {
    for (long w = 0; w < W; ++w) {
      for (std::size_t c = 0; c < in.channels(); ++c) {
        double sum = 0.0;
        int count = 0;
        for (long dy = -r; dy <= r; ++dy) {
          for (long dx = -r; dx <= r; ++dx) {
            const long y = h + dy, x = w + dx;
            if (y < 0 || y >= H || x < 0 || x >= W) continue;
            sum += in.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
            ++count;
          }
        }
        out.at(static_cast<std::size_t>(h), static_cast<std::size_t>(w), c) = static_cast<float>(sum / count);
      }
    }
  }
  return out;
}

// Bilinear as a separable triangle filter over every source pixel, with the
// sample position clamped into [0, n - 1].
inline double triangle_sample(const FeatureTensor& in, std::size_t oy, std::size_t ox, std::size_t c, std::size_t out_h,
                       std::size_t out_w) {
  auto source = [](std::size_t o, std::size_t n_in, std::size_t n_out) {
    const double s = (static_cast<double>(o) + 0.5) * static_cast<double>(n_in) / static_cast<double>(n_out) - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(n_in - 1));
  };
  const double sy = source(oy, in.height(), out_h);
  const double sx = source(ox, in.width(), out_w);
  double v = 0.0;
  for (std::size_t i = 0; i < in.height(); ++i) {
    const double wy = std::max(0.0, 1.0 - std::abs(sy - static_cast<double>(i)));
    if (wy == 0.0) continue;
    for (std::size_t j = 0; j < in.width(); ++j) {
      const double wx = std::max(0.0, 1.0 - std::abs(sx - static_cast<double>(j)));
      v += wy * wx * in.at(i, j, c);
    }
  }
  return v;
}

inline std::size_t mirror(long i, long n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
  return static_cast<std::size_t>(i);
}

// Dense 2-D convolution with a normalized 2-D Gaussian and mirrored borders.
inline ScoreMap dense_gaussian(const ScoreMap& in, double sigma) {
  const long r = static_cast<long>(std::ceil(4.0 * sigma));
  std::vector<double> k2((2 * r + 1) * (2 * r + 1));
  double total = 0.0;
  for (long dy = -r; dy <= r; ++dy) {
    for (long dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-static_cast<double>(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      k2[(dy + r) * (2 * r + 1) + (dx + r)] = v;
      total += v;
    }
  }
  const long H = static_cast<long>(in.height()), W = static_cast<long>(in.width());
  ScoreMap out(in.height(), in.width());
  for (long y = 0; y < H; ++y) {
    for (long x = 0; x < W; ++x) {
      double acc = 0.0;
      for (long dy = -r; dy <= r; ++dy) {
        for (long dx = -r; dx <= r; ++dx) {
          acc += k2[(dy + r) * (2 * r + 1) + (dx + r)] * in.at(mirror(y + dy, H), mirror(x + dx, W));
        }
      }
      out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = static_cast<float>(acc / total);
    }
  }
  return out;
}


// O(n^2) pair count with half credit for ties.
inline double pairwise_auroc(const LabeledScores& d) {
  double credit = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < d.scores.size(); ++i) {
    if (!d.labels[i]) continue;
    for (std::size_t j = 0; j < d.scores.size(); ++j) {
      if (d.labels[j]) continue;
      ++pairs;
      if (d.scores[i] > d.scores[j]) credit += 1.0;
      else if (d.scores[i] == d.scores[j]) credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

}  // namespace oracles

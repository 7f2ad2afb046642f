#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "simplenet/tensor.hpp"

namespace simplenet {

struct LabeledScores {
  std::vector<float> scores;
  std::vector<std::uint8_t> labels;  // 0 normal, 1 anomalous

  std::size_t positives() const;
  std::size_t negatives() const { return labels.size() - positives(); }
  void validate() const;
};

/// Mann-Whitney AUROC: P(pos > neg) + 0.5 P(pos == neg). One sort, tie groups
/// counted with 64-bit integers.
double auroc(const LabeledScores& data);

/// Binary mask with the same layout as a ScoreMap; nonzero marks anomalous pixels.
struct PixelMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;
};

/// Pools every pixel of every map into one ranking and applies auroc.
double pixel_auroc(std::span<const ScoreMap> maps, std::span<const PixelMask> masks);

/// Flattens maps and masks into one labeled set (masks binarized).
LabeledScores pool_pixels(std::span<const ScoreMap> maps, std::span<const PixelMask> masks);

struct F1Threshold {
  double threshold = 0.0;  // predict anomalous when score > threshold
  double f1 = 0.0;
};

/// Scans -inf, the midpoints between consecutive distinct scores, and +inf;
/// keeps the lowest threshold reaching the best anomalous-class F1.
F1Threshold best_f1_threshold(const LabeledScores& data);

struct StdProfile {
  std::vector<double> stds;        // population std per channel
  std::vector<double> bin_edges;   // bins + 1 edges over [0, max std]
  std::vector<std::size_t> counts;
};

/// Per-channel population standard deviation over all vectors, plus histogram.
StdProfile std_profile(std::span<const FeatureTensor> features, std::size_t bins = 50);

}  // namespace simplenet

#include "simplenet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "simplenet/error.hpp"

namespace simplenet {

std::size_t LabeledScores::positives() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                [](std::uint8_t l) { return l != 0; }));
}

void LabeledScores::validate() const {
  require(scores.size() == labels.size(), ErrorCode::shape_mismatch,
          "scores and labels differ in length");
  for (float s : scores) require(!std::isnan(s), ErrorCode::invalid_argument, "NaN score");
  for (auto l : labels) require(l <= 1, ErrorCode::invalid_argument, "labels must be 0 or 1");
}

namespace {

std::vector<std::size_t> ascending_order(const std::vector<float>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace

double auroc(const LabeledScores& data) {
  data.validate();
  const std::uint64_t n_pos = data.positives();
  const std::uint64_t n_neg = data.labels.size() - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::undefined_metric,
          "AUROC needs both classes (positives " + std::to_string(n_pos) + ", negatives " +
              std::to_string(n_neg) + ")");

  const auto order = ascending_order(data.scores);
  // Twice the U statistic: each (pos, neg) pair with pos > neg counts 2, a tie 1.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos_group = 0, neg_group = 0;
    while (j < order.size() && data.scores[order[j]] == data.scores[order[i]]) {
      (data.labels[order[j]] ? pos_group : neg_group) += 1;
      ++j;
    }
    twice_u += 2 * pos_group * neg_below + pos_group * neg_group;
    neg_below += neg_group;
    i = j;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

LabeledScores pool_pixels(std::span<const ScoreMap> maps, std::span<const PixelMask> masks) {
  require(maps.size() == masks.size(), ErrorCode::shape_mismatch, "map and mask counts differ");
  LabeledScores pooled;
  std::size_t total = 0;
  for (const auto& m : maps) total += m.size();
  pooled.scores.reserve(total);
  pooled.labels.reserve(total);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& map = maps[i];
    const auto& mask = masks[i];
    require(map.height() == mask.height && map.width() == mask.width &&
                mask.data.size() == mask.height * mask.width,
            ErrorCode::shape_mismatch,
            "sample " + std::to_string(i) + ": map " + std::to_string(map.height()) + "x" +
                std::to_string(map.width()) + " vs mask " + std::to_string(mask.height) + "x" +
                std::to_string(mask.width));
    auto values = map.data();
    pooled.scores.insert(pooled.scores.end(), values.begin(), values.end());
    for (auto v : mask.data) pooled.labels.push_back(v != 0 ? 1 : 0);
  }
  return pooled;
}

double pixel_auroc(std::span<const ScoreMap> maps, std::span<const PixelMask> masks) {
  return auroc(pool_pixels(maps, masks));
}

F1Threshold best_f1_threshold(const LabeledScores& data) {
  data.validate();
  const std::size_t n_pos = data.positives();
  require(n_pos > 0, ErrorCode::undefined_metric, "F1 needs at least one anomalous sample");
  const auto order = ascending_order(data.scores);

  // Threshold below every score: everything predicted anomalous.
  std::size_t tp = n_pos, fp = data.labels.size() - n_pos;
  auto f1_of = [n_pos](std::size_t tp_, std::size_t fp_) {
    const std::size_t fn = n_pos - tp_;
    const double denom = static_cast<double>(2 * tp_ + fp_ + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp_) / denom;
  };

  F1Threshold best{-std::numeric_limits<double>::infinity(), f1_of(tp, fp)};
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && data.scores[order[j]] == data.scores[order[i]]) {
      (data.labels[order[j]] ? tp : fp) -= 1;
      ++j;
    }
    // Threshold just above this tie group.
    const double threshold =
        j < order.size()
            ? 0.5 * (static_cast<double>(data.scores[order[i]]) + static_cast<double>(data.scores[order[j]]))
            : std::numeric_limits<double>::infinity();
    const double f1 = f1_of(tp, fp);
    if (f1 > best.f1) best = {threshold, f1};
    i = j;
  }
  return best;
}

StdProfile std_profile(std::span<const FeatureTensor> features, std::size_t bins) {
  require(bins >= 1, ErrorCode::invalid_argument, "histogram needs at least one bin");
  require(!features.empty(), ErrorCode::invalid_argument, "std profile needs at least 2 vectors");
  const std::size_t C = features.front().channels();
  std::size_t count = 0;
  for (const auto& f : features) {
    require(f.channels() == C, ErrorCode::shape_mismatch, "std profile: channel counts differ");
    count += f.locations();
  }
  require(count >= 2, ErrorCode::invalid_argument, "std profile needs at least 2 vectors");

  // Welford running moments per channel.
  std::vector<double> mean(C, 0.0), m2(C, 0.0);
  std::size_t seen = 0;
  for (const auto& f : features) {
    for (std::size_t loc = 0; loc < f.locations(); ++loc) {
      ++seen;
      const float* v = f.data().data() + loc * C;
      for (std::size_t c = 0; c < C; ++c) {
        const double delta = v[c] - mean[c];
        mean[c] += delta / static_cast<double>(seen);
        m2[c] += delta * (v[c] - mean[c]);
      }
    }
  }

  StdProfile profile;
  profile.stds.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    profile.stds[c] = std::sqrt(std::max(0.0, m2[c] / static_cast<double>(seen)));
  }
  const double top = *std::max_element(profile.stds.begin(), profile.stds.end());
  profile.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    profile.bin_edges[b] = top * static_cast<double>(b) / static_cast<double>(bins);
  }
  profile.counts.assign(bins, 0);
  for (double s : profile.stds) {
    std::size_t b = top > 0.0 ? static_cast<std::size_t>(s / top * static_cast<double>(bins)) : 0;
    profile.counts[std::min(b, bins - 1)] += 1;
  }
  return profile;
}

}  // namespace simplenet

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace simplenet {

/// Dense H x W x C float map, row-major and channel-last:
/// element (h, w, c) lives at (h * W + w) * C + c.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f);
  /// Takes ownership of `data`; throws on size mismatch or non-finite entries.
  FeatureTensor(std::size_t height, std::size_t width, std::size_t channels,
                std::vector<float> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t locations() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& at(std::size_t h, std::size_t w, std::size_t c) {
    return data_[(h * width_ + w) * channels_ + c];
  }
  float at(std::size_t h, std::size_t w, std::size_t c) const {
    return data_[(h * width_ + w) * channels_ + c];
  }

  std::span<float> pixel(std::size_t h, std::size_t w) {
    return {data_.data() + (h * width_ + w) * channels_, channels_};
  }
  std::span<const float> pixel(std::size_t h, std::size_t w) const {
    return {data_.data() + (h * width_ + w) * channels_, channels_};
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> data_;
};

/// Single-channel H x W score field.
class ScoreMap {
 public:
  ScoreMap() = default;
  ScoreMap(std::size_t height, std::size_t width, float fill = 0.0f);
  ScoreMap(std::size_t height, std::size_t width, std::vector<float> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& at(std::size_t h, std::size_t w) { return data_[h * width_ + w]; }
  float at(std::size_t h, std::size_t w) const { return data_[h * width_ + w]; }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  float max() const;
  float min() const;

  friend bool operator==(const ScoreMap&, const ScoreMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

/// Views a score map as an H x W x 1 tensor (copies).
FeatureTensor as_tensor(const ScoreMap& map);
/// Drops a single-channel tensor back to a score map; throws if C != 1.
ScoreMap as_score_map(const FeatureTensor& tensor);

bool all_finite(std::span<const float> values);

}  // namespace simplenet

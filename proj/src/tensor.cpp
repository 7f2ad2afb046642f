#include "simplenet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simplenet/error.hpp"

namespace simplenet {

bool all_finite(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

FeatureTensor::FeatureTensor(std::size_t height, std::size_t width, std::size_t channels,
                             float fill)
    : height_(height), width_(width), channels_(channels),
      data_(height * width * channels, fill) {}

FeatureTensor::FeatureTensor(std::size_t height, std::size_t width, std::size_t channels,
                             std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  require(data_.size() == height_ * width_ * channels_, ErrorCode::shape_mismatch,
          "feature tensor data length " + std::to_string(data_.size()) + " != " +
              std::to_string(height_) + "x" + std::to_string(width_) + "x" +
              std::to_string(channels_));
  require(all_finite(data_), ErrorCode::invalid_argument, "feature tensor has non-finite entries");
}

ScoreMap::ScoreMap(std::size_t height, std::size_t width, float fill)
    : height_(height), width_(width), data_(height * width, fill) {}

ScoreMap::ScoreMap(std::size_t height, std::size_t width, std::vector<float> data)
    : height_(height), width_(width), data_(std::move(data)) {
  require(data_.size() == height_ * width_, ErrorCode::shape_mismatch,
          "score map data length " + std::to_string(data_.size()) + " != " +
              std::to_string(height_) + "x" + std::to_string(width_));
  require(all_finite(data_), ErrorCode::invalid_argument, "score map has non-finite entries");
}

float ScoreMap::max() const {
  require(!data_.empty(), ErrorCode::invalid_argument, "max of empty score map");
  return *std::max_element(data_.begin(), data_.end());
}

float ScoreMap::min() const {
  require(!data_.empty(), ErrorCode::invalid_argument, "min of empty score map");
  return *std::min_element(data_.begin(), data_.end());
}

FeatureTensor as_tensor(const ScoreMap& map) {
  auto values = map.data();
  return FeatureTensor(map.height(), map.width(), 1, std::vector<float>(values.begin(), values.end()));
}

ScoreMap as_score_map(const FeatureTensor& tensor) {
  require(tensor.channels() == 1, ErrorCode::shape_mismatch, "score map needs a single channel");
  auto values = tensor.data();
  return ScoreMap(tensor.height(), tensor.width(), std::vector<float>(values.begin(), values.end()));
}

}  // namespace simplenet

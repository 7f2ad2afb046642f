#include "simplenet/feature_pipeline.hpp"

#include <algorithm>
#include <string>

#include "simplenet/error.hpp"
#include "simplenet/image_ops.hpp"

namespace simplenet {

HierarchyStack::HierarchyStack(std::vector<HierarchyLevel> levels) : levels_(std::move(levels)) {
  require(!levels_.empty(), ErrorCode::invalid_argument, "hierarchy stack needs at least one level");
  std::sort(levels_.begin(), levels_.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    require(!levels_[i].map.empty(), ErrorCode::invalid_argument,
            "level " + std::to_string(levels_[i].index) + " has an empty map");
    if (i > 0) {
      require(levels_[i].index != levels_[i - 1].index, ErrorCode::validation,
              "duplicate hierarchy level " + std::to_string(levels_[i].index));
    }
  }
}

const HierarchyLevel* HierarchyStack::find(std::uint16_t index) const {
  auto it = std::find_if(levels_.begin(), levels_.end(),
                         [index](const auto& level) { return level.index == index; });
  return it == levels_.end() ? nullptr : &*it;
}

void PipelineConfig::validate() const {
  require(patch_size % 2 == 1, ErrorCode::config,
          "patch size must be odd and >= 1, got " + std::to_string(patch_size));
  require(!levels.empty(), ErrorCode::config, "at least one hierarchy level must be selected");
  auto sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorCode::config,
          "hierarchy levels must be distinct");
}

FeatureTensor extract_local_features(const HierarchyStack& stack, const PipelineConfig& config) {
  config.validate();
  auto selected = config.levels;
  std::sort(selected.begin(), selected.end());

  std::vector<const HierarchyLevel*> inputs;
  inputs.reserve(selected.size());
  for (auto index : selected) {
    const HierarchyLevel* level = stack.find(index);
    require(level != nullptr, ErrorCode::config,
            "hierarchy level " + std::to_string(index) + " is not present in the feature stack");
    inputs.push_back(level);
  }

  // Strict '>' keeps the lowest index among equal areas.
  const HierarchyLevel* largest = inputs.front();
  for (const auto* level : inputs) {
    if (level->map.locations() > largest->map.locations()) largest = level;
  }
  const std::size_t out_h = largest->map.height();
  const std::size_t out_w = largest->map.width();

  std::vector<FeatureTensor> parts;
  parts.reserve(inputs.size());
  for (const auto* level : inputs) {
    parts.push_back(resize_bilinear(aggregate_neighborhood(level->map, config.patch_size), out_h, out_w));
  }
  return concat_channels(parts);
}

}  // namespace simplenet

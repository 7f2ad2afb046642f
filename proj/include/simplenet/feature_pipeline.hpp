#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "simplenet/tensor.hpp"

namespace simplenet {

struct HierarchyLevel {
  std::uint16_t index = 0;
  FeatureTensor map;
};

/// Backbone feature maps for one image, keyed by hierarchy level. Levels are
/// kept in strictly increasing index order.
class HierarchyStack {
 public:
  HierarchyStack() = default;
  /// Sorts by level index; throws on duplicates, empty input or empty maps.
  explicit HierarchyStack(std::vector<HierarchyLevel> levels);

  const std::vector<HierarchyLevel>& levels() const noexcept { return levels_; }
  const HierarchyLevel* find(std::uint16_t index) const;

 private:
  std::vector<HierarchyLevel> levels_;
};

struct PipelineConfig {
  std::size_t patch_size = 3;
  std::vector<std::uint16_t> levels = {2, 3};

  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Local-feature map for one image: neighborhood-aggregate every selected
/// level, resize to the largest level (greatest H*W, lowest index on ties)
/// and concatenate in ascending level order.
FeatureTensor extract_local_features(const HierarchyStack& stack, const PipelineConfig& config);

}  // namespace simplenet

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "simplenet/tensor.hpp"

namespace simplenet {

/// Mean over the p x p window centered at each location, clipped to the map
/// bounds, so border locations average fewer neighbors. p must be odd.
FeatureTensor aggregate_neighborhood(const FeatureTensor& map, std::size_t patch_size);

/// Bilinear resize with pixel-center sampling (align_corners = false);
/// source coordinates below zero clamp to the first row/column.
FeatureTensor resize_bilinear(const FeatureTensor& map, std::size_t out_h, std::size_t out_w);
ScoreMap resize_bilinear(const ScoreMap& map, std::size_t out_h, std::size_t out_w);

/// Channel-wise concatenation in list order.
FeatureTensor concat_channels(std::span<const FeatureTensor> maps);

/// Normalized 1-D Gaussian taps at offsets -r..r with r = ceil(4 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Half-sample symmetric reflection of an out-of-range index into [0, n)
/// (d c b a | a b c d | d c b a).
std::size_t reflect_index(std::ptrdiff_t index, std::size_t n);

/// Separable Gaussian blur, rows then columns, reflect padding.
ScoreMap gaussian_filter(const ScoreMap& map, double sigma);

}  // namespace simplenet

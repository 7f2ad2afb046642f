#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace simplenet {

/// Synthetic stand-in for backbone features. Every cell draws independently
/// from one fixed Gaussian mixture whose components lie near low-rank
/// subspaces; channels are normalized to `feature_std`. Anomalous test maps
/// shift a random rectangle of cells by `shift` along a random unit direction.
struct SynthOptions {
  std::size_t n_train = 200;
  std::size_t n_test = 100;
  std::size_t grid_h = 16;
  std::size_t grid_w = 16;
  std::size_t channels = 32;  // split evenly over levels 2 and 3
  double defect_rate = 0.5;
  double shift = 1.0;
  double feature_std = 0.1;
  std::size_t image_scale = 4;  // mask pixels per grid cell, per axis
  std::size_t components = 4;
  std::size_t rank = 4;
  double isotropic_std = 0.05;  // off-manifold noise relative to the component spread
  std::uint64_t seed = 0;
  std::string dataset = "synth";

  void validate() const;
};

struct SynthSummary {
  std::filesystem::path manifest;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_anomalous = 0;
};

SynthSummary generate_synthetic_dataset(const SynthOptions& options, const std::filesystem::path& out_dir);

}  // namespace simplenet

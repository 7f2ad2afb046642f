#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "simplenet/inference.hpp"
#include "simplenet/model.hpp"

namespace simplenet {

struct BenchOptions {
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t channels = 1536;
  std::size_t iters = 10;
  std::size_t warmup = 2;  // untimed iterations run first
  PostprocessOptions post;
  std::uint64_t seed = 0;
};

struct StageTiming {
  std::string stage;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

struct BenchReport {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t hidden = 0;
  std::size_t iters = 0;
  std::size_t warmup = 0;
  std::vector<StageTiming> stages;  // adaptor, discriminator, postprocess, total
  double images_per_second = 0.0;
  float checksum = 0.0f;  // image score of the last iteration; identical across runs

  std::string to_json() const;
  std::string to_table() const;
};

/// Times adaptor, discriminator and post-processing on one random local
/// feature map of the given shape. The model must match `channels`.
BenchReport run_bench(const ModelParams<float>& model, const BenchOptions& options);

}  // namespace simplenet

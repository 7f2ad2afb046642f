#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace simplenet {

/// Philox4x32-10 counter-based block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Named stream ids so the different consumers of one seed never overlap.
enum class StreamId : std::uint64_t {
  init = 1,
  shuffle = 2,
  noise = 3,
  synth = 4,
  gradcheck = 5,
};

/// Sequential view over a Philox stream. Block `i` of stream `s` under seed `k`
/// is philox(counter = {i_lo, i_hi, s_lo, s_hi}, key = {k_lo, k_hi}), so any
/// draw can be recomputed from (seed, stream, block) alone.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamId stream, std::uint64_t block = 0);
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t block = 0);

  std::array<std::uint32_t, 4> next_block();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return block_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;

  std::uint32_t next_word();
};

/// Box-Muller pair from one Philox block (two 53-bit uniforms).
std::array<double, 2> gaussian_pair(const std::array<std::uint32_t, 4>& block);

/// Fills `out` with N(mean, sigma^2) draws; element pair j uses block
/// (first_block + j) of the given stream. Returns the number of blocks used.
template <typename T>
std::uint64_t fill_gaussian(std::span<T> out, double mean, double sigma, std::uint64_t seed,
                            StreamId stream, std::uint64_t first_block);

/// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, RandomStream& rng);

}  // namespace simplenet

#include "simplenet/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "simplenet/error.hpp"

namespace simplenet {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> counter_for(std::uint64_t block, std::uint64_t stream) {
  return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

std::array<std::uint32_t, 2> key_for(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

double unit_from(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<double, 2> gaussian_pair(const std::array<std::uint32_t, 4>& block) {
  const double u1 = 1.0 - unit_from(block[0], block[1]);  // (0, 1]
  const double u2 = unit_from(block[2], block[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

RandomStream::RandomStream(std::uint64_t seed, StreamId stream, std::uint64_t block)
    : RandomStream(seed, static_cast<std::uint64_t>(stream), block) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t block)
    : seed_(seed), stream_(stream), block_(block) {}

std::array<std::uint32_t, 4> RandomStream::next_block() {
  return philox4x32(counter_for(block_++, stream_), key_for(seed_));
}

std::uint32_t RandomStream::next_word() {
  if (available_ == 0) {
    buffer_ = next_block();
    available_ = 4;
  }
  return buffer_[4 - available_--];
}

double RandomStream::uniform() {
  const std::uint32_t hi = next_word();
  const std::uint32_t lo = next_word();
  return unit_from(hi, lo);
}

double RandomStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const auto pair = gaussian_pair({next_word(), next_word(), next_word(), next_word()});
  spare_normal_ = pair[1];
  has_spare_normal_ = true;
  return pair[0];
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  require(n > 0, ErrorCode::invalid_argument, "below(0)");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t hi = next_word();
    const std::uint64_t v = (hi << 32) | next_word();
    if (v < limit) return v % n;
  }
}

template <typename T>
std::uint64_t fill_gaussian(std::span<T> out, double mean, double sigma, std::uint64_t seed,
                            StreamId stream, std::uint64_t first_block) {
  const auto key = key_for(seed);
  const auto stream_id = static_cast<std::uint64_t>(stream);
  const std::size_t pairs = (out.size() + 1) / 2;
  for (std::size_t j = 0; j < pairs; ++j) {
    const auto z = gaussian_pair(philox4x32(counter_for(first_block + j, stream_id), key));
    out[2 * j] = static_cast<T>(mean + sigma * z[0]);
    if (2 * j + 1 < out.size()) out[2 * j + 1] = static_cast<T>(mean + sigma * z[1]);
  }
  return pairs;
}

template std::uint64_t fill_gaussian<float>(std::span<float>, double, double, std::uint64_t,
                                            StreamId, std::uint64_t);
template std::uint64_t fill_gaussian<double>(std::span<double>, double, double, std::uint64_t,
                                             StreamId, std::uint64_t);

std::vector<std::size_t> shuffled_indices(std::size_t n, RandomStream& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace simplenet

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simplenet {

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Appends little-endian scalars to a byte buffer.
class ByteWriter {
 public:
  void bytes(std::span<const std::uint8_t> data);
  void tag(std::string_view four_cc);
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void f32s(std::span<const float> values);
  /// Appends the CRC32 of everything written so far.
  void seal();

  const std::vector<std::uint8_t>& buffer() const noexcept { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader; running off the end is a truncation error.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string context);

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  void expect_tag(std::string_view four_cc);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  /// Reads `count` raw floats (no finiteness check).
  std::vector<float> f32s(std::size_t count);
  /// Checks that enough bytes remain for `count` items of `item_size` bytes.
  void need(std::size_t count, std::size_t item_size);

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string context_;
};

/// Splits off and verifies the trailing CRC32, returning the covered body.
std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> file, const std::string& context);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace simplenet

#include "simplenet/byte_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "simplenet/error.hpp"

namespace simplenet {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
    }
    return out;
  }
  return v;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = ::crc32(crc, bytes.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void ByteWriter::bytes(std::span<const std::uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

void ByteWriter::tag(std::string_view four_cc) {
  for (char c : four_cc) buf_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::u8(std::uint8_t v) { buf_.push_back(v); }

#define SIMPLENET_PUT(NAME, TYPE)                                       \
  void ByteWriter::NAME(TYPE v) {                                       \
    const TYPE le = to_little(v);                                       \
    const auto* p = reinterpret_cast<const std::uint8_t*>(&le);         \
    buf_.insert(buf_.end(), p, p + sizeof(TYPE));                       \
  }
SIMPLENET_PUT(u16, std::uint16_t)
SIMPLENET_PUT(u32, std::uint32_t)
SIMPLENET_PUT(u64, std::uint64_t)
#undef SIMPLENET_PUT

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f32s(std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  } else {
    for (float v : values) f32(v);
  }
}

void ByteWriter::seal() { u32(crc32(buf_)); }

ByteReader::ByteReader(std::span<const std::uint8_t> data, std::string context)
    : data_(data), context_(std::move(context)) {}

void ByteReader::need(std::size_t count, std::size_t item_size) {
  if (item_size != 0 && count > remaining() / item_size) {
    fail(ErrorCode::truncated, context_ + ": needs " + std::to_string(count) + "x" +
                                   std::to_string(item_size) + " bytes at offset " +
                                   std::to_string(pos_) + ", " + std::to_string(remaining()) + " left");
  }
}

void ByteReader::expect_tag(std::string_view four_cc) {
  need(four_cc.size(), 1);
  if (std::memcmp(data_.data() + pos_, four_cc.data(), four_cc.size()) != 0) {
    fail(ErrorCode::bad_magic, context_ + ": expected magic '" + std::string(four_cc) + "'");
  }
  pos_ += four_cc.size();
}

std::uint8_t ByteReader::u8() {
  need(1, 1);
  return data_[pos_++];
}

#define SIMPLENET_GET(NAME, TYPE)                        \
  TYPE ByteReader::NAME() {                              \
    need(1, sizeof(TYPE));                               \
    TYPE v;                                              \
    std::memcpy(&v, data_.data() + pos_, sizeof(TYPE));  \
    pos_ += sizeof(TYPE);                                \
    return to_little(v);                                 \
  }
SIMPLENET_GET(u16, std::uint16_t)
SIMPLENET_GET(u32, std::uint32_t)
SIMPLENET_GET(u64, std::uint64_t)
#undef SIMPLENET_GET

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<float> ByteReader::f32s(std::size_t count) {
  need(count, sizeof(float));
  std::vector<float> out(count);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), data_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
  } else {
    for (auto& v : out) v = f32();
  }
  return out;
}

std::span<const std::uint8_t> verify_crc(std::span<const std::uint8_t> file, const std::string& context) {
  require(file.size() >= 4, ErrorCode::truncated, context + ": too short for a checksum");
  auto body = file.first(file.size() - 4);
  ByteReader tail(file.last(4), context);
  const std::uint32_t stored = tail.u32();
  require(stored == crc32(body), ErrorCode::checksum_mismatch, context + ": CRC32 does not match payload");
  return body;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::io, "read failed for " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace simplenet

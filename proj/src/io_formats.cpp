#include "simplenet/io_formats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "simplenet/byte_io.hpp"
#include "simplenet/error.hpp"

namespace simplenet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto at_path(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  require(v <= UINT32_MAX, ErrorCode::invalid_argument, std::string(what) + " exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

void check_version(std::uint16_t found, std::uint16_t expected, const std::string& context) {
  require(found == expected, ErrorCode::bad_version,
          context + ": unsupported version " + std::to_string(found) + " (expected " +
              std::to_string(expected) + ")");
}

void check_consumed(const ByteReader& reader, const std::string& context) {
  require(reader.remaining() == 0, ErrorCode::malformed,
          context + ": " + std::to_string(reader.remaining()) + " unexpected trailing bytes");
}

// Header checks run before the CRC so truncated or foreign files report the
// more specific error.
void check_header(std::span<const std::uint8_t> bytes, std::string_view magic, std::uint16_t version,
                  const std::string& context) {
  ByteReader header(bytes, context);
  header.need(1, magic.size() + sizeof(std::uint16_t));
  header.expect_tag(magic);
  check_version(header.u16(), version, context);
}

}  // namespace

// ---------------------------------------------------------------------------
// SNFT

std::vector<std::uint8_t> encode_feature_file(const HierarchyStack& stack) {
  require(!stack.levels().empty(), ErrorCode::invalid_argument, "cannot write an empty hierarchy stack");
  ByteWriter w;
  w.tag("SNFT");
  w.u16(kFeatureFileVersion);
  require(stack.levels().size() <= UINT16_MAX, ErrorCode::invalid_argument, "too many levels");
  w.u16(static_cast<std::uint16_t>(stack.levels().size()));
  for (const auto& level : stack.levels()) {
    w.u16(level.index);
    w.u32(narrow_u32(level.map.height(), "height"));
    w.u32(narrow_u32(level.map.width(), "width"));
    w.u32(narrow_u32(level.map.channels(), "channels"));
    w.f32s(level.map.data());
  }
  w.seal();
  return w.take();
}

HierarchyStack decode_feature_file(std::span<const std::uint8_t> bytes, const std::string& context) {
  check_header(bytes, "SNFT", kFeatureFileVersion, context);
  // Parse the layout first so a short file reports truncation, then checksum.
  ByteReader r(bytes.first(bytes.size() >= 4 ? bytes.size() - 4 : 0), context);
  r.expect_tag("SNFT");
  r.u16();
  const std::uint16_t count = r.u16();
  struct RawLevel {
    std::uint16_t index;
    std::size_t h, w, c;
    std::vector<float> values;
  };
  std::vector<RawLevel> raw;
  raw.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    RawLevel level{r.u16(), r.u32(), r.u32(), r.u32(), {}};
    level.values = r.f32s(level.h * level.w * level.c);
    raw.push_back(std::move(level));
  }
  require(bytes.size() >= 4, ErrorCode::truncated, context + ": missing checksum");
  check_consumed(r, context);
  verify_crc(bytes, context);

  require(count > 0, ErrorCode::malformed, context + ": no levels");
  std::vector<HierarchyLevel> levels;
  levels.reserve(count);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& level = raw[i];
    require(i == 0 || level.index > raw[i - 1].index, ErrorCode::malformed,
            context + ": level indices must be strictly increasing");
    require(level.h > 0 && level.w > 0 && level.c > 0, ErrorCode::malformed,
            context + ": level " + std::to_string(level.index) + " has a zero dimension");
    require(all_finite(level.values), ErrorCode::malformed,
            context + ": level " + std::to_string(level.index) + " has non-finite values");
    levels.push_back({level.index, FeatureTensor(level.h, level.w, level.c, std::move(level.values))});
  }
  return HierarchyStack(std::move(levels));
}

void write_feature_file(const HierarchyStack& stack, const fs::path& path) {
  at_path(path, [&] {
    write_file_atomic(path, encode_feature_file(stack));
    return 0;
  });
}

HierarchyStack read_feature_file(const fs::path& path) {
  return at_path(path, [&] { return decode_feature_file(read_file(path), "SNFT"); });
}

// ---------------------------------------------------------------------------
// SNCK

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  ck.pipeline.validate();
  ck.model.validate();
  ByteWriter w;
  w.tag("SNCK");
  w.u16(kCheckpointVersion);

  w.u32(narrow_u32(ck.pipeline.patch_size, "patch size"));
  w.u16(static_cast<std::uint16_t>(ck.pipeline.levels.size()));
  for (auto l : ck.pipeline.levels) w.u16(l);

  const auto& a = ck.model.adaptor;
  w.u8(static_cast<std::uint8_t>(a.variant));
  w.u32(narrow_u32(a.dim(), "adaptor dim"));
  w.f32(a.leaky_slope);
  w.f32s(a.weight.data);
  if (a.variant == AdaptorVariant::mlp) w.f32s(a.weight2.data);

  const auto& d = ck.model.discriminator;
  w.u32(narrow_u32(d.input_dim(), "discriminator input dim"));
  w.u32(narrow_u32(d.hidden_dim(), "discriminator hidden dim"));
  w.f32s(d.w1.data);
  for (const auto* v : {&d.b1, &d.bn_gamma, &d.bn_beta, &d.bn_running_mean, &d.bn_running_var, &d.w2}) {
    w.f32s(*v);
  }
  w.f32(d.b2);
  w.f32(d.leaky_slope);
  w.f32(d.bn_momentum);
  w.f32(d.bn_eps);
  w.u8(ck.model.finalized ? 1 : 0);

  const auto& t = ck.train;
  w.f64(t.th_pos);
  w.f64(t.th_neg);
  w.f64(t.lr_adaptor);
  w.f64(t.lr_discriminator);
  w.f64(t.weight_decay);
  w.u64(t.epochs);
  w.u64(t.batch_size);
  w.f64(t.noise.mean);
  w.f64(t.noise.sigma);
  w.u64(t.noise.seed);
  w.u8(static_cast<std::uint8_t>(t.loss));
  w.u64(t.seed);
  w.seal();
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& context) {
  check_header(bytes, "SNCK", kCheckpointVersion, context);
  ByteReader r(bytes.first(bytes.size() >= 4 ? bytes.size() - 4 : 0), context);
  r.expect_tag("SNCK");
  r.u16();

  Checkpoint ck;
  ck.pipeline.patch_size = r.u32();
  const std::uint16_t n_levels = r.u16();
  ck.pipeline.levels.clear();
  for (std::uint16_t i = 0; i < n_levels; ++i) ck.pipeline.levels.push_back(r.u16());

  auto& a = ck.model.adaptor;
  const std::uint8_t variant = r.u8();
  require(variant <= static_cast<std::uint8_t>(AdaptorVariant::mlp), ErrorCode::malformed,
          context + ": unknown adaptor variant " + std::to_string(variant));
  a.variant = static_cast<AdaptorVariant>(variant);
  const std::size_t C = r.u32();
  a.leaky_slope = r.f32();
  a.weight = Matrix<float>(C, C, r.f32s(C * C));
  if (a.variant == AdaptorVariant::mlp) a.weight2 = Matrix<float>(C, C, r.f32s(C * C));

  auto& d = ck.model.discriminator;
  const std::size_t dc = r.u32(), hd = r.u32();
  d.w1 = Matrix<float>(dc, hd, r.f32s(dc * hd));
  for (auto* v : {&d.b1, &d.bn_gamma, &d.bn_beta, &d.bn_running_mean, &d.bn_running_var, &d.w2}) {
    *v = r.f32s(hd);
  }
  d.b2 = r.f32();
  d.leaky_slope = r.f32();
  d.bn_momentum = r.f32();
  d.bn_eps = r.f32();
  ck.model.finalized = r.u8() != 0;

  auto& t = ck.train;
  t.th_pos = r.f64();
  t.th_neg = r.f64();
  t.lr_adaptor = r.f64();
  t.lr_discriminator = r.f64();
  t.weight_decay = r.f64();
  t.epochs = r.u64();
  t.batch_size = r.u64();
  t.noise.mean = r.f64();
  t.noise.sigma = r.f64();
  t.noise.seed = r.u64();
  const std::uint8_t loss = r.u8();
  require(loss <= static_cast<std::uint8_t>(LossKind::cross_entropy), ErrorCode::malformed,
          context + ": unknown loss kind");
  t.loss = static_cast<LossKind>(loss);
  t.seed = r.u64();
  require(bytes.size() >= 4, ErrorCode::truncated, context + ": missing checksum");
  check_consumed(r, context);
  verify_crc(bytes, context);

  try {
    ck.pipeline.validate();
    ck.model.validate();
    ck.train.validate();
  } catch (const Error& e) {
    fail(ErrorCode::malformed, context + ": " + e.what());
  }
  return ck;
}

void write_checkpoint(const Checkpoint& ck, const fs::path& path) {
  at_path(path, [&] {
    write_file_atomic(path, encode_checkpoint(ck));
    return 0;
  });
}

Checkpoint read_checkpoint(const fs::path& path) {
  return at_path(path, [&] { return decode_checkpoint(read_file(path), "SNCK"); });
}

// ---------------------------------------------------------------------------
// Manifest

fs::path Manifest::resolve(const std::string& relative) const {
  fs::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<const ManifestSample*> Manifest::split(Split which) const {
  std::vector<const ManifestSample*> out;
  for (const auto& s : samples) {
    if (s.split == which) out.push_back(&s);
  }
  return out;
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  require(j.contains(key), ErrorCode::validation, where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::validation, where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Manifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::malformed, std::string("manifest is not valid JSON: ") + e.what());
  }
  require(doc.is_object(), ErrorCode::validation, "manifest must be a JSON object");
  if (doc.contains("format")) {
    require(doc["format"] == "simplenet-manifest", ErrorCode::validation, "manifest format tag mismatch");
  }
  if (doc.contains("version")) {
    require(doc["version"] == 1, ErrorCode::bad_version, "unsupported manifest version");
  }

  Manifest m;
  m.base_dir = base_dir;
  m.dataset = field<std::string>(doc, "dataset", "manifest");
  m.category = doc.contains("category") ? field<std::string>(doc, "category", "manifest") : m.dataset;
  const auto size = field<std::vector<std::size_t>>(doc, "image_size", "manifest");
  require(size.size() == 2 && size[0] > 0 && size[1] > 0, ErrorCode::validation,
          "manifest image_size must be [H, W] with positive entries");
  m.image_height = size[0];
  m.image_width = size[1];
  if (doc.contains("meta")) {
    require(doc["meta"].is_object(), ErrorCode::validation, "manifest meta must be an object");
    for (const auto& [key, value] : doc["meta"].items()) {
      require(value.is_number(), ErrorCode::validation, "manifest meta values must be numbers");
      m.meta[key] = value.get<double>();
    }
  }

  const auto& samples = doc.contains("samples") ? doc["samples"] : json();
  require(samples.is_array(), ErrorCode::validation, "manifest needs a 'samples' array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& js = samples[i];
    const std::string where = "manifest sample " + std::to_string(i);
    require(js.is_object(), ErrorCode::validation, where + " is not an object");
    ManifestSample s;
    s.id = field<std::string>(js, "id", where);
    require(!s.id.empty(), ErrorCode::validation, where + ": empty id");
    require(ids.insert(s.id).second, ErrorCode::validation, "duplicate sample id '" + s.id + "'");
    const auto split = field<std::string>(js, "split", where);
    require(split == "train" || split == "test", ErrorCode::validation,
            where + ": split must be 'train' or 'test'");
    s.split = split == "train" ? Split::train : Split::test;
    s.label = field<int>(js, "label", where);
    require(s.label == 0 || s.label == 1, ErrorCode::validation, where + ": label must be 0 or 1");
    require(!(s.split == Split::train && s.label != 0), ErrorCode::protocol_violation,
            "training sample '" + s.id + "' is labeled anomalous; training uses normal samples only");
    s.features = field<std::string>(js, "features", where);
    if (js.contains("mask") && !js["mask"].is_null()) s.mask = field<std::string>(js, "mask", where);
    s.category = js.contains("category") ? field<std::string>(js, "category", where) : m.category;
    m.samples.push_back(std::move(s));
  }
  return m;
}

Manifest read_manifest(const fs::path& path) {
  return at_path(path, [&] {
    const auto bytes = read_file(path);
    Manifest m = parse_manifest(std::string(bytes.begin(), bytes.end()), path.parent_path());
    for (const auto& s : m.samples) {
      require(fs::exists(m.resolve(s.features)), ErrorCode::validation,
              "sample '" + s.id + "': feature file " + m.resolve(s.features).string() + " not found");
      if (s.mask) {
        require(fs::exists(m.resolve(*s.mask)), ErrorCode::validation,
                "sample '" + s.id + "': mask " + m.resolve(*s.mask).string() + " not found");
      }
    }
    return m;
  });
}

std::string manifest_to_json(const Manifest& m) {
  json doc;
  doc["format"] = "simplenet-manifest";
  doc["version"] = 1;
  doc["dataset"] = m.dataset;
  doc["category"] = m.category;
  doc["image_size"] = {m.image_height, m.image_width};
  if (!m.meta.empty()) doc["meta"] = m.meta;
  doc["samples"] = json::array();
  for (const auto& s : m.samples) {
    json js;
    js["id"] = s.id;
    js["split"] = s.split == Split::train ? "train" : "test";
    js["label"] = s.label;
    js["features"] = s.features;
    if (s.mask) js["mask"] = *s.mask;
    if (s.category != m.category) js["category"] = s.category;
    doc["samples"].push_back(std::move(js));
  }
  return doc.dump(2) + "\n";
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  at_path(path, [&] {
    write_text_atomic(path, manifest_to_json(manifest));
    return 0;
  });
}

// ---------------------------------------------------------------------------
// PGM

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  require(image.pixels.size() == image.height * image.width && !image.pixels.empty(),
          ErrorCode::shape_mismatch, "PGM pixel count does not match its size");
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& context) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::size_t value = 0, digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos++] - '0');
      require(++digits <= 9, ErrorCode::malformed, context + ": header number too large");
    }
    require(digits > 0, pos < bytes.size() ? ErrorCode::malformed : ErrorCode::truncated,
            context + ": malformed PGM header");
    return value;
  };
  require(bytes.size() >= 2, ErrorCode::truncated, context + ": empty PGM");
  require(bytes[0] == 'P' && bytes[1] == '5', ErrorCode::bad_magic, context + ": not a binary PGM (P5)");
  pos = 2;
  GrayImage image;
  image.width = number();
  image.height = number();
  const std::size_t maxval = number();
  require(maxval == 255, ErrorCode::malformed, context + ": only 8-bit PGM is supported");
  require(pos < bytes.size() && std::isspace(bytes[pos]), ErrorCode::truncated, context + ": truncated header");
  ++pos;
  const std::size_t n = image.width * image.height;
  require(n > 0, ErrorCode::malformed, context + ": zero-sized image");
  require(bytes.size() - pos >= n, ErrorCode::truncated, context + ": pixel data truncated");
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return image;
}

GrayImage read_pgm(const fs::path& path) {
  return at_path(path, [&] { return decode_pgm(read_file(path), "PGM"); });
}

void write_pgm(const GrayImage& image, const fs::path& path) {
  at_path(path, [&] {
    write_file_atomic(path, encode_pgm(image));
    return 0;
  });
}

PixelMask read_mask(const fs::path& path) {
  GrayImage img = read_pgm(path);
  PixelMask mask{img.height, img.width, std::move(img.pixels)};
  for (auto& v : mask.data) v = v != 0 ? 1 : 0;
  return mask;
}

// ---------------------------------------------------------------------------
// Anomaly maps

MapFormat parse_map_format(const std::string& name) {
  if (name == "raw" || name == "raw-f32") return MapFormat::raw_f32;
  if (name == "gray8" || name == "pgm") return MapFormat::gray8;
  fail(ErrorCode::config, "unknown map format '" + name + "' (expected raw or gray8)");
}

GrayMap to_gray(const AnomalyResult& result) {
  GrayMap g;
  g.min = result.map.min();
  g.max = result.map.max();
  g.constant = !(g.max > g.min);
  g.image_score = result.image_score;
  g.image.height = result.map.height();
  g.image.width = result.map.width();
  g.image.pixels.resize(result.map.size());
  const double range = static_cast<double>(g.max) - static_cast<double>(g.min);
  auto values = result.map.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = g.constant ? 0.0 : (static_cast<double>(values[i]) - g.min) / range;
    g.image.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(t * 255.0), 0L, 255L));
  }
  return g;
}

ScoreMap from_gray(const GrayMap& g) {
  std::vector<float> values(g.image.pixels.size());
  const double range = static_cast<double>(g.max) - static_cast<double>(g.min);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<float>(g.min + (g.constant ? 0.0 : g.image.pixels[i] / 255.0 * range));
  }
  return ScoreMap(g.image.height, g.image.width, std::move(values));
}

std::string gray_sidecar_json(const GrayMap& g) {
  json doc;
  doc["height"] = g.image.height;
  doc["width"] = g.image.width;
  doc["min"] = g.min;
  doc["max"] = g.max;
  doc["constant"] = g.constant;
  doc["image_score"] = g.image_score;
  return doc.dump(2) + "\n";
}

GrayMap parse_gray_sidecar(const std::string& text, GrayImage image) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::malformed, std::string("sidecar is not valid JSON: ") + e.what());
  }
  GrayMap g;
  g.min = field<float>(doc, "min", "sidecar");
  g.max = field<float>(doc, "max", "sidecar");
  g.constant = field<bool>(doc, "constant", "sidecar");
  g.image_score = field<float>(doc, "image_score", "sidecar");
  require(field<std::size_t>(doc, "height", "sidecar") == image.height &&
              field<std::size_t>(doc, "width", "sidecar") == image.width,
          ErrorCode::shape_mismatch, "sidecar dimensions do not match the image");
  g.image = std::move(image);
  return g;
}

std::vector<std::uint8_t> encode_anomaly_map(const AnomalyResult& result) {
  ByteWriter w;
  w.tag("SNAM");
  w.u16(kAnomalyMapVersion);
  w.f32(result.image_score);
  w.u32(narrow_u32(result.map.height(), "map height"));
  w.u32(narrow_u32(result.map.width(), "map width"));
  w.f32s(result.map.data());
  w.u32(narrow_u32(result.raw_map.height(), "raw height"));
  w.u32(narrow_u32(result.raw_map.width(), "raw width"));
  w.f32s(result.raw_map.data());
  w.seal();
  return w.take();
}

AnomalyResult decode_anomaly_map(std::span<const std::uint8_t> bytes, const std::string& context) {
  check_header(bytes, "SNAM", kAnomalyMapVersion, context);
  ByteReader r(bytes.first(bytes.size() >= 4 ? bytes.size() - 4 : 0), context);
  r.expect_tag("SNAM");
  r.u16();
  const float image_score = r.f32();
  const std::size_t h = r.u32(), w = r.u32();
  auto map = r.f32s(h * w);
  const std::size_t rh = r.u32(), rw = r.u32();
  auto raw = r.f32s(rh * rw);
  require(bytes.size() >= 4, ErrorCode::truncated, context + ": missing checksum");
  check_consumed(r, context);
  verify_crc(bytes, context);

  require(std::isfinite(image_score) && all_finite(map) && all_finite(raw), ErrorCode::malformed,
          context + ": non-finite values");
  AnomalyResult result;
  result.image_score = image_score;
  result.map = ScoreMap(h, w, std::move(map));
  result.raw_map = ScoreMap(rh, rw, std::move(raw));
  return result;
}

fs::path write_anomaly_map(const AnomalyResult& result, const fs::path& stem, MapFormat format) {
  if (format == MapFormat::raw_f32) {
    auto path = stem;
    path += ".snam";
    at_path(path, [&] {
      write_file_atomic(path, encode_anomaly_map(result));
      return 0;
    });
    return path;
  }
  const GrayMap g = to_gray(result);
  auto pgm = stem;
  pgm += ".pgm";
  auto sidecar = stem;
  sidecar += ".json";
  write_pgm(g.image, pgm);
  at_path(sidecar, [&] {
    write_text_atomic(sidecar, gray_sidecar_json(g));
    return 0;
  });
  return pgm;
}

AnomalyResult read_anomaly_map(const fs::path& path) {
  return at_path(path, [&] { return decode_anomaly_map(read_file(path), "SNAM"); });
}

GrayMap read_gray_map(const fs::path& pgm_path) {
  auto sidecar = pgm_path;
  sidecar.replace_extension(".json");
  GrayImage image = read_pgm(pgm_path);
  return at_path(sidecar, [&] {
    const auto bytes = read_file(sidecar);
    return parse_gray_sidecar(std::string(bytes.begin(), bytes.end()), std::move(image));
  });
}

}  // namespace simplenet

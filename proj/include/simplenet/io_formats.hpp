#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simplenet/evaluation.hpp"
#include "simplenet/feature_pipeline.hpp"
#include "simplenet/inference.hpp"
#include "simplenet/model.hpp"
#include "simplenet/training.hpp"

namespace simplenet {

// Feature file (SNFT v1), little-endian:
//   "SNFT" | u16 version | u16 level_count
//   per level: u16 level_index | u32 H | u32 W | u32 C | H*W*C f32 (row-major, channel-last)
//   u32 CRC32 of every preceding byte
inline constexpr std::uint16_t kFeatureFileVersion = 1;

std::vector<std::uint8_t> encode_feature_file(const HierarchyStack& stack);
HierarchyStack decode_feature_file(std::span<const std::uint8_t> bytes, const std::string& context = "SNFT");
void write_feature_file(const HierarchyStack& stack, const std::filesystem::path& path);
HierarchyStack read_feature_file(const std::filesystem::path& path);

// Checkpoint (SNCK v1), little-endian:
//   "SNCK" | u16 version
//   pipeline:  u32 patch_size | u16 n | n x u16 level
//   adaptor:   u8 variant | u32 C | f32 leaky_slope | C*C f32 weight | (mlp) C*C f32 weight2
//   disc:      u32 C | u32 Hd | C*Hd f32 w1 | Hd f32 each of b1, gamma, beta, running_mean,
//              running_var, w2 | f32 b2 | f32 leaky_slope | f32 bn_momentum | f32 bn_eps
//   u8 finalized
//   train:     f64 th_pos, th_neg, lr_adaptor, lr_discriminator, weight_decay | u64 epochs |
//              u64 batch_size | f64 noise_mean | f64 noise_sigma | u64 noise_seed | u8 loss | u64 seed
//   u32 CRC32 of every preceding byte
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  PipelineConfig pipeline;
  ModelParams<float> model;
  TrainConfig train;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& context = "SNCK");
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Dataset manifest (JSON):
// {
//   "format": "simplenet-manifest", "version": 1,
//   "dataset": "name", "category": "name (optional, defaults to dataset)",
//   "image_size": [H, W],
//   "samples": [{"id": "...", "split": "train"|"test", "label": 0|1,
//                "features": "path.snft", "mask": "path.pgm" (optional),
//                "category": "... (optional)"}],
//   "meta": {"key": number, ...} (optional)
// }
// Relative paths resolve against the manifest's directory.
enum class Split { train, test };

struct ManifestSample {
  std::string id;
  Split split = Split::train;
  int label = 0;
  std::string category;
  std::string features;
  std::optional<std::string> mask;
};

struct Manifest {
  std::string dataset;
  std::string category;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  std::vector<ManifestSample> samples;
  std::map<std::string, double> meta;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const;
  std::vector<const ManifestSample*> split(Split which) const;
};

/// Parses and validates: unique ids, train samples labeled 0, labels in {0, 1}.
Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
/// parse_manifest plus a check that every referenced file exists.
Manifest read_manifest(const std::filesystem::path& path);
std::string manifest_to_json(const Manifest& manifest);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// 8-bit binary PGM (P5), used for masks and grayscale anomaly maps.
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& context = "PGM");
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

PixelMask read_mask(const std::filesystem::path& path);

// Anomaly map, raw format (SNAM v1), little-endian:
//   "SNAM" | u16 version | f32 image_score | u32 H | u32 W | H*W f32 map |
//   u32 H0 | u32 W0 | H0*W0 f32 raw map | u32 CRC32 of every preceding byte
inline constexpr std::uint16_t kAnomalyMapVersion = 1;

enum class MapFormat { raw_f32, gray8 };
MapFormat parse_map_format(const std::string& name);

/// Min-max normalized 8-bit view of the map plus the values needed to undo it.
struct GrayMap {
  GrayImage image;
  float min = 0.0f;
  float max = 0.0f;
  bool constant = false;
  float image_score = 0.0f;
};

GrayMap to_gray(const AnomalyResult& result);
/// Reconstructs scores from a grayscale map: min + pixel / 255 * (max - min).
ScoreMap from_gray(const GrayMap& gray);
std::string gray_sidecar_json(const GrayMap& gray);
GrayMap parse_gray_sidecar(const std::string& json, GrayImage image);

std::vector<std::uint8_t> encode_anomaly_map(const AnomalyResult& result);
AnomalyResult decode_anomaly_map(std::span<const std::uint8_t> bytes, const std::string& context = "SNAM");

/// Writes `<stem>.snam` (raw) or `<stem>.pgm` + `<stem>.json` (gray8). Returns
/// the primary file written.
std::filesystem::path write_anomaly_map(const AnomalyResult& result, const std::filesystem::path& stem,
                                        MapFormat format);
AnomalyResult read_anomaly_map(const std::filesystem::path& path);
GrayMap read_gray_map(const std::filesystem::path& pgm_path);

}  // namespace simplenet

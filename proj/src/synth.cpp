#include "simplenet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "simplenet/error.hpp"
#include "simplenet/io_formats.hpp"
#include "simplenet/rng.hpp"

namespace simplenet {

namespace fs = std::filesystem;

void SynthOptions::validate() const {
  require(n_train >= 1 && n_test >= 1, ErrorCode::config, "synth needs at least one train and one test sample");
  require(grid_h >= 1 && grid_w >= 1, ErrorCode::config, "synth grid must be at least 1x1");
  require(channels >= 2 && channels % 2 == 0, ErrorCode::config, "synth channels must be even and >= 2");
  require(defect_rate >= 0.0 && defect_rate <= 1.0, ErrorCode::config, "defect rate must be in [0, 1]");
  require(std::isfinite(shift) && shift >= 0.0, ErrorCode::config, "shift must be finite and >= 0");
  require(feature_std > 0.0 && std::isfinite(feature_std), ErrorCode::config, "feature std must be positive");
  require(image_scale >= 1, ErrorCode::config, "image scale must be >= 1");
  require(components >= 1 && rank >= 1, ErrorCode::config, "mixture needs >= 1 component and rank >= 1");
  require(isotropic_std >= 0.0, ErrorCode::config, "isotropic std must be >= 0");
}

namespace {

class Mixture {
 public:
  Mixture(const SynthOptions& opt, RandomStream& rng)
      : channels_(opt.channels), rank_(opt.rank), iso_(opt.isotropic_std) {
    means_.resize(opt.components * channels_);
    bases_.resize(opt.components * channels_ * rank_);
    for (auto& v : means_) v = rng.normal();
    const double scale = 1.0 / std::sqrt(static_cast<double>(rank_));
    for (auto& v : bases_) v = scale * rng.normal();
  }

  // Raw draw before normalization.
  void sample(RandomStream& rng, std::span<double> out) const {
    const std::size_t components = means_.size() / channels_;
    const std::size_t k = rng.below(components);
    std::vector<double> z(rank_);
    for (auto& v : z) v = rng.normal();
    for (std::size_t c = 0; c < channels_; ++c) {
      double x = means_[k * channels_ + c];
      const double* b = &bases_[(k * channels_ + c) * rank_];
      for (std::size_t r = 0; r < rank_; ++r) x += b[r] * z[r];
      out[c] = x + iso_ * rng.normal();
    }
  }

  std::size_t channels() const { return channels_; }

 private:
  std::size_t channels_;
  std::size_t rank_;
  double iso_;
  std::vector<double> means_;
  std::vector<double> bases_;
};

struct Normalizer {
  std::vector<double> mean;
  std::vector<double> scale;
};

// Per-channel affine map to zero mean and the requested std, estimated from a
// dedicated calibration sample.
Normalizer calibrate(const Mixture& mixture, const SynthOptions& opt) {
  constexpr std::size_t kDraws = 20000;
  const std::size_t C = mixture.channels();
  RandomStream rng(opt.seed, StreamId::synth, std::uint64_t{1} << 62);
  std::vector<double> sum(C, 0.0), sum_sq(C, 0.0), x(C);
  for (std::size_t i = 0; i < kDraws; ++i) {
    mixture.sample(rng, x);
    for (std::size_t c = 0; c < C; ++c) {
      sum[c] += x[c];
      sum_sq[c] += x[c] * x[c];
    }
  }
  Normalizer n{std::vector<double>(C), std::vector<double>(C)};
  for (std::size_t c = 0; c < C; ++c) {
    n.mean[c] = sum[c] / kDraws;
    const double var = std::max(sum_sq[c] / kDraws - n.mean[c] * n.mean[c], 1e-12);
    n.scale[c] = opt.feature_std / std::sqrt(var);
  }
  return n;
}

struct Rect {
  std::size_t top = 0, left = 0, height = 0, width = 0;
  bool contains(std::size_t h, std::size_t w) const {
    return h >= top && h < top + height && w >= left && w < left + width;
  }
};

Rect draw_rect(RandomStream& rng, std::size_t H, std::size_t W) {
  auto extent = [&](std::size_t n) {
    const std::size_t lo = std::min<std::size_t>(2, n);
    const std::size_t hi = std::max(lo, n / 3);
    return lo + rng.below(hi - lo + 1);
  };
  Rect r;
  r.height = extent(H);
  r.width = extent(W);
  r.top = rng.below(H - r.height + 1);
  r.left = rng.below(W - r.width + 1);
  return r;
}

HierarchyStack make_sample(const Mixture& mixture, const Normalizer& norm, const SynthOptions& opt,
                           RandomStream& rng, const Rect* defect) {
  const std::size_t C = opt.channels;
  const std::size_t half = C / 2;
  std::vector<double> direction;
  if (defect) {
    direction.resize(C);
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (auto& v : direction) {
        v = rng.normal();
        norm_sq += v * v;
      }
    } while (norm_sq == 0.0);
    for (auto& v : direction) v /= std::sqrt(norm_sq);
  }

  FeatureTensor low(opt.grid_h, opt.grid_w, half);
  FeatureTensor high(opt.grid_h, opt.grid_w, half);
  std::vector<double> x(C);
  for (std::size_t h = 0; h < opt.grid_h; ++h) {
    for (std::size_t w = 0; w < opt.grid_w; ++w) {
      mixture.sample(rng, x);
      const bool shifted = defect && defect->contains(h, w);
      for (std::size_t c = 0; c < C; ++c) {
        double v = (x[c] - norm.mean[c]) * norm.scale[c];
        if (shifted) v += opt.shift * direction[c];
        (c < half ? low.at(h, w, c) : high.at(h, w, c - half)) = static_cast<float>(v);
      }
    }
  }
  std::vector<HierarchyLevel> levels;
  levels.push_back({2, std::move(low)});
  levels.push_back({3, std::move(high)});
  return HierarchyStack(std::move(levels));
}

GrayImage make_mask(const Rect& rect, const SynthOptions& opt) {
  GrayImage mask;
  mask.height = opt.grid_h * opt.image_scale;
  mask.width = opt.grid_w * opt.image_scale;
  mask.pixels.assign(mask.height * mask.width, 0);
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) {
      if (rect.contains(y / opt.image_scale, x / opt.image_scale)) mask.pixels[y * mask.width + x] = 255;
    }
  }
  return mask;
}

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, i);
  return buf;
}

}  // namespace

SynthSummary generate_synthetic_dataset(const SynthOptions& opt, const fs::path& out_dir) {
  opt.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "features", ec);
  fs::create_directories(out_dir / "masks", ec);
  require(!ec, ErrorCode::io, "cannot create " + out_dir.string() + ": " + ec.message());

  RandomStream mixture_rng(opt.seed, StreamId::synth, 0);
  const Mixture mixture(opt, mixture_rng);
  const Normalizer norm = calibrate(mixture, opt);

  Manifest manifest;
  manifest.dataset = opt.dataset;
  manifest.category = opt.dataset;
  manifest.image_height = opt.grid_h * opt.image_scale;
  manifest.image_width = opt.grid_w * opt.image_scale;
  manifest.base_dir = out_dir;
  manifest.meta = {{"feature_std", opt.feature_std},
                   {"shift", opt.shift},
                   {"seed", static_cast<double>(opt.seed)},
                   {"grid_h", static_cast<double>(opt.grid_h)},
                   {"grid_w", static_cast<double>(opt.grid_w)},
                   {"channels", static_cast<double>(opt.channels)}};

  SynthSummary summary;
  const std::size_t n_anomalous =
      static_cast<std::size_t>(std::llround(opt.defect_rate * static_cast<double>(opt.n_test)));
  // Every sample owns a disjoint block range of the synth stream.
  std::uint64_t sample_index = 0;
  auto sample_rng = [&] { return RandomStream(opt.seed, StreamId::synth, (++sample_index) << 32); };

  for (std::size_t i = 0; i < opt.n_train; ++i) {
    RandomStream rng = sample_rng();
    const std::string id = numbered("train", i);
    const std::string rel = "features/" + id + ".snft";
    write_feature_file(make_sample(mixture, norm, opt, rng, nullptr), out_dir / rel);
    manifest.samples.push_back({id, Split::train, 0, opt.dataset, rel, std::nullopt});
  }
  for (std::size_t i = 0; i < opt.n_test; ++i) {
    RandomStream rng = sample_rng();
    const std::string id = numbered("test", i);
    const std::string rel = "features/" + id + ".snft";
    ManifestSample s{id, Split::test, 0, opt.dataset, rel, std::nullopt};
    if (i < n_anomalous) {
      const Rect rect = draw_rect(rng, opt.grid_h, opt.grid_w);
      write_feature_file(make_sample(mixture, norm, opt, rng, &rect), out_dir / rel);
      const std::string mask_rel = "masks/" + id + ".pgm";
      write_pgm(make_mask(rect, opt), out_dir / mask_rel);
      s.label = 1;
      s.mask = mask_rel;
    } else {
      write_feature_file(make_sample(mixture, norm, opt, rng, nullptr), out_dir / rel);
    }
    manifest.samples.push_back(std::move(s));
  }

  summary.manifest = out_dir / "manifest.json";
  write_manifest(manifest, summary.manifest);
  summary.n_train = opt.n_train;
  summary.n_test = opt.n_test;
  summary.n_anomalous = n_anomalous;
  return summary;
}

}  // namespace simplenet

#include "simplenet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "simplenet/error.hpp"
#include "simplenet/rng.hpp"

namespace simplenet {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start, Clock::time_point end) {
  return std::chrono::duration<double, std::milli>(end - start).count();
}

StageTiming summarize(std::string name, std::vector<double> samples) {
  StageTiming t;
  t.stage = std::move(name);
  std::sort(samples.begin(), samples.end());
  t.min_ms = samples.front();
  t.max_ms = samples.back();
  t.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  const std::size_t mid = samples.size() / 2;
  t.median_ms = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  return t;
}

}  // namespace

BenchReport run_bench(const ModelParams<float>& model, const BenchOptions& opt) {
  require(opt.iters >= 1, ErrorCode::config, "bench needs --iters >= 1");
  require(opt.height >= 1 && opt.width >= 1 && opt.channels >= 1, ErrorCode::config,
          "bench shape must be positive");
  require(model.dim() == opt.channels, ErrorCode::shape_mismatch,
          "bench shape has " + std::to_string(opt.channels) + " channels but the model expects " +
              std::to_string(model.dim()));

  const std::size_t rows = opt.height * opt.width;
  Matrix<float> features(rows, opt.channels);
  fill_gaussian<float>(features.data, 0.0, 1.0, opt.seed, StreamId::synth, 0);

  std::vector<double> adaptor_ms, disc_ms, post_ms, total_ms;
  BenchReport report;
  for (std::size_t it = 0; it < opt.warmup + opt.iters; ++it) {
    const auto t0 = Clock::now();
    const Matrix<float> adapted = adaptor_forward(model.adaptor, features);
    const auto t1 = Clock::now();
    std::vector<float> scores = discriminator_scores(model.discriminator, adapted);
    for (auto& s : scores) s = -s;
    const auto t2 = Clock::now();
    const AnomalyResult result = build_result(ScoreMap(opt.height, opt.width, std::move(scores)), opt.post);
    const auto t3 = Clock::now();
    report.checksum = result.image_score;
    if (it < opt.warmup) continue;
    adaptor_ms.push_back(elapsed_ms(t0, t1));
    disc_ms.push_back(elapsed_ms(t1, t2));
    post_ms.push_back(elapsed_ms(t2, t3));
    total_ms.push_back(elapsed_ms(t0, t3));
  }

  report.height = opt.height;
  report.width = opt.width;
  report.channels = opt.channels;
  report.hidden = model.discriminator.hidden_dim();
  report.iters = opt.iters;
  report.warmup = opt.warmup;
  report.stages.push_back(summarize("adaptor", std::move(adaptor_ms)));
  report.stages.push_back(summarize("discriminator", std::move(disc_ms)));
  report.stages.push_back(summarize("postprocess", std::move(post_ms)));
  report.stages.push_back(summarize("total", std::move(total_ms)));
  const double mean_total = report.stages.back().mean_ms;
  report.images_per_second = mean_total > 0.0 ? 1000.0 / mean_total : 0.0;
  return report;
}

std::string BenchReport::to_json() const {
  nlohmann::json doc;
  doc["shape"] = {height, width, channels};
  doc["hidden"] = hidden;
  doc["iters"] = iters;
  doc["warmup_excluded"] = warmup;
  doc["images_per_second"] = images_per_second;
  doc["checksum"] = checksum;
  doc["stages"] = nlohmann::json::array();
  for (const auto& s : stages) {
    doc["stages"].push_back({{"stage", s.stage},
                             {"mean_ms", s.mean_ms},
                             {"median_ms", s.median_ms},
                             {"min_ms", s.min_ms},
                             {"max_ms", s.max_ms}});
  }
  return doc.dump(2);
}

std::string BenchReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "shape %zux%zux%zu  hidden %zu  iters %zu (+%zu warmup excluded)\n", height,
                width, channels, hidden, iters, warmup);
  out += line;
  std::snprintf(line, sizeof line, "%-14s %10s %10s %10s %10s\n", "stage", "mean_ms", "median_ms", "min_ms",
                "max_ms");
  out += line;
  for (const auto& s : stages) {
    std::snprintf(line, sizeof line, "%-14s %10.3f %10.3f %10.3f %10.3f\n", s.stage.c_str(), s.mean_ms,
                  s.median_ms, s.min_ms, s.max_ms);
    out += line;
  }
  std::snprintf(line, sizeof line, "images/s %.2f\n", images_per_second);
  out += line;
  return out;
}

}  // namespace simplenet

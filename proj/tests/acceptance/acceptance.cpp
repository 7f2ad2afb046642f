// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [work_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "simplenet/error.hpp"
#include "simplenet/feature_pipeline.hpp"
#include "simplenet/image_ops.hpp"
#include "simplenet/inference.hpp"
#include "simplenet/io_formats.hpp"
#include "simplenet/training.hpp"
#include "test_util.hpp"

using namespace simplenet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path g_work;

int snet(const std::string& args, const std::string& log_name) {
  const auto log = g_work / log_name;
  return testutil::run_command(std::string("\"") + SNET_BINARY + "\" " + args + " >\"" + log.string() + "\" 2>&1");
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Cells of the given category row of an eval CSV.
std::map<std::string, std::string> eval_row(const fs::path& csv, const std::string& category) {
  std::stringstream in(testutil::slurp(csv));
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> cols;
  {
    std::stringstream hs(header);
    for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  }
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!cells.empty() && cells[0] == category) {
      std::map<std::string, std::string> row;
      for (std::size_t i = 0; i < cols.size() && i < cells.size(); ++i) row[cols[i]] = cells[i];
      return row;
    }
  }
  return {};
}

double as_number(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  if (it == row.end() || it->second == "NA") return NAN;
  return std::stod(it->second);
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = snet("gradcheck --dims 8 8 16 --configs 20", "gradcheck.json");
  const double secs = seconds_since(t0);
  o.check(rc == 0, "exit code " + std::to_string(rc));
  try {
    const auto doc = nlohmann::json::parse(testutil::slurp(g_work / "gradcheck.json").substr(
        testutil::slurp(g_work / "gradcheck.json").find('{')));
    const double err = doc["max_rel_error"];
    o.check(err < 1e-4, "max rel error " + fmt("%.3g", err));
    o.check(doc["configs"].size() >= 20, "fewer than 20 configs");
    bool variants[3] = {false, false, false}, losses[2] = {false, false};
    for (const auto& c : doc["configs"]) {
      o.check(c["channels"] <= 8 && c["hidden"] <= 8 && c["batch"] <= 16, "config outside bounds");
      const std::string a = c["adaptor"], l = c["loss"];
      variants[a == "linear" ? 0 : a == "mlp" ? 1 : 2] = true;
      losses[l == "ce" ? 1 : 0] = true;
    }
    o.check(variants[0] && variants[1] && variants[2] && losses[0] && losses[1], "not every variant/loss covered");
    o.note("max rel error " + fmt("%.3g", err));
  } catch (const std::exception& e) {
    o.check(false, std::string("unparsable report: ") + e.what());
  }
  o.check(secs < 30.0, "runtime " + fmt("%.1f s", secs));
  o.note(fmt("%.2f s", secs));
  return o;
}

Outcome loss_table() {
  Outcome o;
  auto run = [](double p, double n) {
    return truncated_l1_loss<double>(std::vector<double>{p}, std::vector<double>{n}, 0.5, -0.5);
  };
  const auto a = run(0.5, -0.5), b = run(0.0, 0.0), c = run(1.0, -1.0);
  o.check(a.loss == 0.0, "D(q)=0.5, D(q-)=-0.5 loss " + fmt("%g", a.loss));
  o.check(b.loss == 1.0, "D(q)=0, D(q-)=0 loss " + fmt("%g", b.loss));
  o.check(c.loss == 0.0, "D(q)=1, D(q-)=-1 loss " + fmt("%g", c.loss));
  o.check(c.pos_grads[0] == 0.0 && c.neg_grads[0] == 0.0, "saturated gradients nonzero");
  const auto ce = cross_entropy_loss<double>(std::vector<double>{0.0}, std::vector<double>{0.0});
  o.check(std::abs(ce.loss - std::log(2.0)) < 1e-15, "CE at 0 is not ln 2");
  o.note("0, 1, 0 with zero saturated gradients");
  return o;
}

Outcome auroc_oracle() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::size_t mismatches = 0, tie_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 199;
    const int distinct = trial % 2 == 0 ? 1 + static_cast<int>(gen() % 8) : 0;
    if (distinct > 0) ++tie_cases;
    LabeledScores d;
    for (std::size_t i = 0; i < n; ++i) {
      d.labels.push_back(static_cast<std::uint8_t>(gen() % 2));
      d.scores.push_back(distinct > 0 ? static_cast<float>(gen() % distinct)
                                      : std::uniform_real_distribution<float>(-5, 5)(gen));
    }
    d.labels[0] = 0;
    d.labels[n - 1] = 1;
    if (auroc(d) != oracles::pairwise_auroc(d)) ++mismatches;
  }
  o.check(mismatches == 0, std::to_string(mismatches) + " mismatches");

  // Splitting the same pixels into different map partitions leaves P-AUROC unchanged.
  const std::size_t H = 12, W = 10;
  const auto whole = testutil::random_map(H, W, gen);
  PixelMask mask{H, W, std::vector<std::uint8_t>(H * W)};
  for (auto& v : mask.data) v = gen() % 4 == 0 ? 255 : 0;
  const std::vector<ScoreMap> one{whole};
  const std::vector<PixelMask> one_mask{mask};
  const double ref = pixel_auroc(one, one_mask);
  bool invariant = true;
  for (std::size_t rows : {1u, 2u, 3u, 4u, 6u}) {
    std::vector<ScoreMap> maps;
    std::vector<PixelMask> masks;
    for (std::size_t r0 = 0; r0 < H; r0 += rows) {
      const auto a = whole.data().begin() + r0 * W;
      maps.emplace_back(rows, W, std::vector<float>(a, a + rows * W));
      masks.push_back({rows, W, std::vector<std::uint8_t>(mask.data.begin() + r0 * W, mask.data.begin() + (r0 + rows) * W)});
    }
    invariant = invariant && pixel_auroc(maps, masks) == ref;
  }
  o.check(invariant, "pixel AUROC changed under re-partitioning");
  o.note("1000 instances (" + std::to_string(tie_cases) + " heavy-tie), partition-invariant");
  return o;
}

Outcome filter_resize_oracles() {
  Outcome o;
  std::mt19937_64 gen(77);
  double gauss_err = 0.0, resize_err = 0.0;
  std::size_t agg_mismatch = 0;
  for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{32, 32}, {7, 19}, {3, 3}}) {
      const auto m = testutil::random_map(h, w, gen);
      const auto fast = gaussian_filter(m, sigma);
      const auto dense = oracles::dense_gaussian(m, sigma);
      for (std::size_t i = 0; i < m.size(); ++i)
        gauss_err = std::max(gauss_err, static_cast<double>(std::abs(fast.data()[i] - dense.data()[i])));
    }
  }
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t h = 1 + gen() % 12, w = 1 + gen() % 12, c = 1 + gen() % 3;
    const std::size_t oh = 1 + gen() % 40, ow = 1 + gen() % 40;
    const auto m = testutil::random_tensor(h, w, c, gen);
    const auto out = resize_bilinear(m, oh, ow);
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t k = 0; k < c; ++k)
          resize_err = std::max(resize_err, std::abs(out.at(y, x, k) - oracles::triangle_sample(m, y, x, k, oh, ow)));
    const std::size_t p = 1 + 2 * (gen() % 4);
    if (aggregate_neighborhood(m, p) != oracles::naive_aggregate(m, p)) ++agg_mismatch;
  }
  o.check(gauss_err <= 1e-5, "gaussian max error " + fmt("%.3g", gauss_err));
  o.check(resize_err <= 1e-6, "bilinear max error " + fmt("%.3g", resize_err));
  o.check(agg_mismatch == 0, std::to_string(agg_mismatch) + " aggregation mismatches");
  o.note("gaussian " + fmt("%.2g", gauss_err) + ", bilinear " + fmt("%.2g", resize_err) + ", aggregation exact");
  return o;
}

struct EndToEnd {
  bool ran = false;
  double seconds = 0.0;
  fs::path data;        // shift > 0 dataset
  fs::path checkpoint;  // trained on it
};
EndToEnd g_e2e;

Outcome synthetic_end_to_end() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string common = " --n-train 200 --n-test 100 --grid 16 16 --channels 32 --feature-std 0.1 --seed 0";
  const auto shifted = g_work / "synth_shift", null = g_work / "synth_null";

  int rc = snet("synth --out-dir " + q(shifted) + common + " --shift 1.0", "synth_shift.log");
  o.check(rc == 0, "synth shift=1 exit " + std::to_string(rc));
  rc = snet("train --manifest " + q(shifted / "manifest.json") + " --out " + q(g_work / "shift.snck") + " --epochs 40",
            "train_shift.log");
  o.check(rc == 0, "train shift=1 exit " + std::to_string(rc));
  rc = snet("eval --checkpoint " + q(g_work / "shift.snck") + " --manifest " + q(shifted / "manifest.json") +
                " --out " + q(g_work / "eval_shift.csv"),
            "eval_shift.log");
  o.check(rc == 0, "eval shift=1 exit " + std::to_string(rc));
  const auto row = eval_row(g_work / "eval_shift.csv", "synth");
  const double i_auroc = as_number(row, "i_auroc"), p_auroc = as_number(row, "p_auroc");
  o.check(i_auroc >= 0.95, "shift=1 I-AUROC " + fmt("%.4f", i_auroc));
  o.check(p_auroc >= 0.90, "shift=1 P-AUROC " + fmt("%.4f", p_auroc));

  rc = snet("synth --out-dir " + q(null) + common + " --shift 0", "synth_null.log");
  o.check(rc == 0, "synth shift=0 exit " + std::to_string(rc));
  rc = snet("train --manifest " + q(null / "manifest.json") + " --out " + q(g_work / "null.snck") + " --epochs 40",
            "train_null.log");
  o.check(rc == 0, "train shift=0 exit " + std::to_string(rc));
  rc = snet("eval --checkpoint " + q(g_work / "null.snck") + " --manifest " + q(null / "manifest.json") + " --out " +
                q(g_work / "eval_null.csv"),
            "eval_null.log");
  o.check(rc == 0, "eval shift=0 exit " + std::to_string(rc));
  const double null_auroc = as_number(eval_row(g_work / "eval_null.csv", "synth"), "i_auroc");
  o.check(std::abs(null_auroc - 0.5) <= 0.1, "shift=0 I-AUROC " + fmt("%.4f", null_auroc));

  const double secs = seconds_since(t0);
  o.check(secs < 300.0, "runtime " + fmt("%.1f s", secs));
  o.note("shift=1: I " + fmt("%.4f", i_auroc) + " P " + fmt("%.4f", p_auroc) + "; shift=0: I " +
         fmt("%.4f", null_auroc) + "; " + fmt("%.1f s", secs));
  g_e2e = {true, secs, shifted, g_work / "shift.snck"};
  return o;
}

Outcome determinism_persistence() {
  Outcome o;
  fs::path data = g_e2e.data;
  fs::path first = g_e2e.checkpoint;
  if (!g_e2e.ran || !fs::exists(first)) {
    data = g_work / "det_data";
    first = g_work / "det_a.snck";
    o.check(snet("synth --out-dir " + q(data) + " --n-train 20 --n-test 10 --grid 8 8 --channels 16", "det_synth.log") == 0,
            "synth failed");
    o.check(snet("train --manifest " + q(data / "manifest.json") + " --out " + q(first) + " --epochs 40", "det_a.log") == 0,
            "first train failed");
  }
  const auto second = g_work / "det_b.snck";
  o.check(snet("train --manifest " + q(data / "manifest.json") + " --out " + q(second) + " --epochs 40", "det_b.log") == 0,
          "second train failed");
  auto loss_csv = [](fs::path p) { return p.replace_extension(".loss.csv"); };
  o.check(testutil::slurp(first) == testutil::slurp(second), "checkpoints differ");
  o.check(!testutil::slurp(loss_csv(first)).empty() &&
              testutil::slurp(loss_csv(first)) == testutil::slurp(loss_csv(second)),
          "loss traces differ");

  try {
    const auto ck = read_checkpoint(first);
    const auto round = decode_checkpoint(encode_checkpoint(ck));
    const auto manifest = read_manifest(data / "manifest.json");
    std::vector<HierarchyStack> stacks;
    for (const auto* s : manifest.split(Split::test)) stacks.push_back(read_feature_file(manifest.resolve(s->features)));
    InferenceOptions opt;
    opt.post = {64, 64, 4.0, false};
    const auto a = infer_batch(ck.model, stacks, ck.pipeline, opt);
    const auto b = infer_batch(round.model, stacks, round.pipeline, opt);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a[i].map == b[i].map && a[i].image_score == b[i].image_score;
    o.check(same, "round-tripped checkpoint scores differ");

    // Eval-mode scores of each vector alone equal its score inside the full batch.
    const auto local = extract_local_features(stacks.front(), ck.pipeline);
    const auto rows = adaptor_forward(ck.model.adaptor, as_rows<float>(local.data(), local.locations(), local.channels()));
    const auto full = discriminator_scores(ck.model.discriminator, rows);
    bool invariant = true;
    for (std::size_t r = 0; r < rows.rows; ++r) {
      Matrix<float> one(1, rows.cols, std::vector<float>(rows.row(r).begin(), rows.row(r).end()));
      invariant = invariant && discriminator_scores(ck.model.discriminator, one)[0] == full[r];
    }
    std::vector<HierarchyStack> mixed{stacks.back(), stacks.front()};
    const auto m = infer_batch(ck.model, mixed, ck.pipeline, opt);
    invariant = invariant && m[1].map == a.front().map && m[0].map == a.back().map;
    o.check(invariant, "scores depend on batch composition");
  } catch (const Error& e) {
    o.check(false, e.what());
  }
  o.note("checkpoints, loss traces, round-trip scores and batch invariance bit-identical");
  return o;
}

Outcome noise_statistics() {
  Outcome o;
  NoiseConfig cfg;  // sigma 0.015
  NoiseState state;
  const Matrix<float> q(1000, 1000, 0.5f);
  const auto qm = generate_anomalous(q, cfg, state);
  const double n = 1e6;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < qm.data.size(); ++i) {
    const double e = static_cast<double>(qm.data[i]) - q.data[i];
    s1 += e;
    s2 += e * e;
  }
  const double mean = s1 / n, sd = std::sqrt(s2 / n - mean * mean);
  const double se_mean = cfg.sigma / std::sqrt(n), se_sd = cfg.sigma / std::sqrt(2.0 * n);
  o.check(std::abs(mean) < 3.0 * se_mean, "mean " + fmt("%.3g", mean));
  o.check(std::abs(sd - cfg.sigma) < 3.0 * se_sd, "std " + fmt("%.6g", sd));
  o.note("mean " + fmt("%.2g", mean) + " (" + fmt("%.2f", mean / se_mean) + " SE), std " + fmt("%.6f", sd) + " (" +
         fmt("%.2f", (sd - cfg.sigma) / se_sd) + " SE)");
  return o;
}

Outcome benchmark_harness() {
  Outcome o;
  const auto json_path = g_work / "bench.json";
  const int rc = snet("bench --shape 28 28 1536 --iters 3 --warmup 1 --json " + q(json_path), "bench.log");
  o.check(rc == 0, "exit code " + std::to_string(rc));
  try {
    const auto doc = nlohmann::json::parse(testutil::slurp(json_path));
    std::vector<std::string> stages;
    for (const auto& s : doc["stages"]) stages.push_back(s["stage"]);
    o.check(stages == std::vector<std::string>{"adaptor", "discriminator", "postprocess", "total"},
            "missing stage breakdown");
    o.check(doc["shape"] == nlohmann::json::array({28, 28, 1536}), "wrong shape");
    const double ips = doc["images_per_second"];
    o.note(fmt("%.2f images/s (informational)", ips));
  } catch (const std::exception& e) {
    o.check(false, std::string("unparsable report: ") + e.what());
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::unique_ptr<testutil::TempDir> temp;
  if (argc > 1) {
    g_work = argv[1];
    fs::create_directories(g_work);
  } else {
    temp = std::make_unique<testutil::TempDir>();
    g_work = temp->path();
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient_correctness", gradient_correctness},
      {"loss_table", loss_table},
      {"auroc_oracle_equivalence", auroc_oracle},
      {"filter_resize_oracles", filter_resize_oracles},
      {"synthetic_end_to_end", synthetic_end_to_end},
      {"determinism_persistence", determinism_persistence},
      {"noise_statistics", noise_statistics},
      {"benchmark_harness", benchmark_harness},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simplenet/bench.hpp"
#include "simplenet/byte_io.hpp"
#include "simplenet/evaluation.hpp"
#include "simplenet/gradcheck.hpp"
#include "simplenet/inference.hpp"
#include "simplenet/io_formats.hpp"
#include "simplenet/synth.hpp"
#include "simplenet/training.hpp"

namespace snet {

using namespace simplenet;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::config:
      return kExitUsage;
    case ErrorCode::numerical_check:
      return kExitNumerical;
    case ErrorCode::internal:
      return kExitInternal;
    default:
      return kExitData;
  }
}

namespace {

// One line with every option value, enough to rerun the command.
void log_config(const CLI::App& cmd) {
  std::string line = "snet " + cmd.get_name();
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      for (char ch : opt->get_default_str()) {
        if (ch != '[' && ch != ']' && ch != '{' && ch != '}' && ch != ' ') value += ch;
      }
      if (value.empty() && opt->get_expected_max() == 0) value = "false";
    }
    line += " --" + opt->get_lnames().front() + "=" + value;
  }
  std::cerr << line << "\n";
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt("%.6f", *v) : "NA"; }

struct LoadedSample {
  const ManifestSample* sample;
  HierarchyStack stack;
};

std::vector<LoadedSample> load_split(const Manifest& manifest, std::optional<Split> split,
                                     const std::string& category) {
  std::vector<LoadedSample> out;
  for (const auto& s : manifest.samples) {
    if (split && s.split != *split) continue;
    if (!category.empty() && s.category != category) continue;
    out.push_back({&s, read_feature_file(manifest.resolve(s.features))});
  }
  return out;
}

bool is_feature_file(const fs::path& path) {
  const auto bytes = read_file(path);
  return bytes.size() >= 4 && std::string(bytes.begin(), bytes.begin() + 4) == "SNFT";
}

std::pair<std::size_t, std::size_t> out_size_or(const std::vector<std::size_t>& flag, std::size_t h,
                                                std::size_t w) {
  if (flag.empty()) return {h, w};
  require(flag.size() == 2 && flag[0] >= 1 && flag[1] >= 1, ErrorCode::config, "--out-size takes H W >= 1");
  return {flag[0], flag[1]};
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string manifest;
  std::string out;
  std::string loss_csv;
  std::string category;
  double sigma = 0.015;
  std::size_t patch_size = 3;
  std::vector<std::uint16_t> levels = {2, 3};
  std::string adaptor = "linear";
  std::string loss = "trunc_l1";
  std::size_t epochs = 160;
  std::size_t batch = 4;
  std::uint64_t seed = 0;
  double lr_adaptor = 1e-4;
  double lr_disc = 2e-4;
  double weight_decay = 1e-5;
  double th_pos = 0.5;
  double th_neg = -0.5;
  std::size_t hidden = 0;
};

int run_train(const TrainArgs& a) {
  PipelineConfig pipeline{a.patch_size, a.levels};
  pipeline.validate();
  TrainConfig cfg;
  cfg.th_pos = a.th_pos;
  cfg.th_neg = a.th_neg;
  cfg.lr_adaptor = a.lr_adaptor;
  cfg.lr_discriminator = a.lr_disc;
  cfg.weight_decay = a.weight_decay;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.noise.sigma = a.sigma;
  cfg.noise.seed = a.seed;
  cfg.loss = parse_loss_kind(a.loss);
  cfg.seed = a.seed;
  cfg.validate();
  const AdaptorVariant variant = parse_adaptor_variant(a.adaptor);

  const Manifest manifest = read_manifest(a.manifest);
  const auto samples = load_split(manifest, Split::train, a.category);
  require(!samples.empty(), ErrorCode::validation, "manifest has no training samples");
  std::vector<FeatureTensor> features;
  features.reserve(samples.size());
  for (const auto& s : samples) features.push_back(extract_local_features(s.stack, pipeline));
  const std::size_t C = features.front().channels();
  const std::size_t hidden = a.hidden == 0 ? C : a.hidden;
  std::cerr << "train: " << features.size() << " samples, local features " << features.front().height() << "x"
            << features.front().width() << "x" << C << ", hidden " << hidden << "\n";

  TrainResult result = train(features, init_model(C, hidden, variant, a.seed), cfg, [&](const EpochRecord& r) {
    std::fprintf(stderr, "epoch %zu/%zu loss %.6f (%.1f ms)\n", r.epoch + 1, cfg.epochs, r.mean_loss, r.wall_ms);
  });

  std::string csv = "epoch,mean_loss\n";
  for (const auto& r : result.trace) csv += std::to_string(r.epoch + 1) + "," + fmt("%.17g", r.mean_loss) + "\n";
  const fs::path loss_path = a.loss_csv.empty() ? fs::path(a.out).replace_extension(".loss.csv") : fs::path(a.loss_csv);
  write_checkpoint(Checkpoint{pipeline, result.model, cfg}, a.out);
  write_text_atomic(loss_path, csv);
  std::cerr << "wrote " << a.out << " and " << loss_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct InferArgs {
  std::string checkpoint;
  std::string input;
  std::string out_dir;
  std::string map_format = "raw";
  std::string split = "test";
  double smooth_sigma = 4.0;
  bool score_after_smoothing = false;
  std::vector<std::size_t> out_size;
  std::size_t threads = 1;
};

int run_infer(const InferArgs& a) {
  const MapFormat format = parse_map_format(a.map_format);
  require(a.smooth_sigma >= 0.0, ErrorCode::config, "--smooth-sigma must be >= 0");
  require(a.split == "test" || a.split == "train" || a.split == "all", ErrorCode::config,
          "--split must be test, train or all");
  const Checkpoint ck = read_checkpoint(a.checkpoint);

  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<HierarchyStack> stacks;
  std::size_t out_h = 224, out_w = 224;
  if (is_feature_file(a.input)) {
    ids.push_back(fs::path(a.input).stem().string());
    labels.emplace_back();
    stacks.push_back(read_feature_file(a.input));
  } else {
    const Manifest manifest = read_manifest(a.input);
    std::optional<Split> split;
    if (a.split != "all") split = a.split == "test" ? Split::test : Split::train;
    for (auto& s : load_split(manifest, split, "")) {
      ids.push_back(s.sample->id);
      labels.push_back(std::to_string(s.sample->label));
      stacks.push_back(std::move(s.stack));
    }
    out_h = manifest.image_height;
    out_w = manifest.image_width;
  }
  InferenceOptions opts;
  std::tie(opts.post.out_h, opts.post.out_w) = out_size_or(a.out_size, out_h, out_w);
  opts.post.smoothing_sigma = a.smooth_sigma;
  opts.post.score_after_smoothing = a.score_after_smoothing;
  opts.threads = a.threads;

  const auto results = infer_batch(ck.model, stacks, ck.pipeline, opts);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  require(!ec, ErrorCode::io, "cannot create " + a.out_dir + ": " + ec.message());
  std::string csv = "id,label,image_score\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_anomaly_map(results[i], fs::path(a.out_dir) / ids[i], format);
    csv += ids[i] + "," + labels[i] + "," + fmt("%.9g", results[i].image_score) + "\n";
  }
  write_text_atomic(fs::path(a.out_dir) / "scores.csv", csv);
  std::cerr << "infer: wrote " << results.size() << " maps to " << a.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out;
  std::string category;
  double smooth_sigma = 4.0;
  bool score_after_smoothing = false;
  std::vector<std::size_t> out_size;
  std::size_t threads = 1;
};

struct CategoryMetrics {
  std::string category;
  std::size_t n_test = 0;
  std::optional<double> i_auroc;
  std::optional<double> p_auroc;
  std::optional<double> f1_threshold;
  std::optional<double> f1;
};

template <typename Fn>
std::optional<double> metric_or_absent(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::undefined_metric) throw;
    std::cerr << "eval: " << what << " undefined: " << e.message() << "\n";
    return std::nullopt;
  }
}

int run_eval(const EvalArgs& a) {
  require(a.smooth_sigma >= 0.0, ErrorCode::config, "--smooth-sigma must be >= 0");
  const Checkpoint ck = read_checkpoint(a.checkpoint);
  const Manifest manifest = read_manifest(a.manifest);
  auto samples = load_split(manifest, Split::test, a.category);
  require(!samples.empty(), ErrorCode::validation, "manifest has no test samples");

  InferenceOptions opts;
  std::tie(opts.post.out_h, opts.post.out_w) = out_size_or(a.out_size, manifest.image_height, manifest.image_width);
  opts.post.smoothing_sigma = a.smooth_sigma;
  opts.post.score_after_smoothing = a.score_after_smoothing;
  opts.threads = a.threads;
  std::vector<HierarchyStack> stacks;
  for (auto& s : samples) stacks.push_back(std::move(s.stack));
  const auto results = infer_batch(ck.model, stacks, ck.pipeline, opts);

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string& cat = samples[i].sample->category;
    if (!groups.count(cat)) order.push_back(cat);
    groups[cat].push_back(i);
  }

  std::vector<CategoryMetrics> rows;
  for (const auto& cat : order) {
    CategoryMetrics m;
    m.category = cat;
    const auto& idx = groups[cat];
    m.n_test = idx.size();
    LabeledScores image;
    bool masks_complete = true;
    std::vector<ScoreMap> maps;
    std::vector<PixelMask> masks;
    for (std::size_t i : idx) {
      const ManifestSample& s = *samples[i].sample;
      image.scores.push_back(results[i].image_score);
      image.labels.push_back(static_cast<std::uint8_t>(s.label));
      if (s.mask) {
        masks.push_back(read_mask(manifest.resolve(*s.mask)));
      } else if (s.label == 0) {
        const auto& map = results[i].map;
        masks.push_back(PixelMask{map.height(), map.width(), std::vector<std::uint8_t>(map.size(), 0)});
      } else {
        masks_complete = false;
      }
      maps.push_back(results[i].map);
    }
    m.i_auroc = metric_or_absent(cat + " I-AUROC", [&] { return auroc(image); });
    if (masks_complete) {
      m.p_auroc = metric_or_absent(cat + " P-AUROC", [&] { return pixel_auroc(maps, masks); });
    } else {
      std::cerr << "eval: " << cat << ": anomalous samples without masks, P-AUROC absent\n";
    }
    if (image.positives() > 0) {
      const F1Threshold best = best_f1_threshold(image);
      m.f1_threshold = best.threshold;
      m.f1 = best.f1;
    }
    rows.push_back(std::move(m));
  }

  auto mean_of = [&](std::optional<double> CategoryMetrics::*field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.*field) {
        sum += *(r.*field);
        ++n;
      }
    }
    return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
  };
  CategoryMetrics avg;
  avg.category = "average";
  for (const auto& r : rows) avg.n_test += r.n_test;
  avg.i_auroc = mean_of(&CategoryMetrics::i_auroc);
  avg.p_auroc = mean_of(&CategoryMetrics::p_auroc);
  avg.f1 = mean_of(&CategoryMetrics::f1);
  rows.push_back(avg);

  std::string csv = "category,n_test,i_auroc,p_auroc,f1_threshold,f1,f1_level\n";
  std::printf("%-16s %7s %9s %9s %12s %8s\n", "category", "n_test", "I-AUROC", "P-AUROC", "threshold", "F1");
  for (const auto& r : rows) {
    const std::string threshold = r.f1_threshold ? fmt("%.9g", *r.f1_threshold) : "NA";
    csv += r.category + "," + std::to_string(r.n_test) + "," + fmt_opt(r.i_auroc) + "," + fmt_opt(r.p_auroc) +
           "," + threshold + "," + fmt_opt(r.f1) + ",image\n";
    std::printf("%-16s %7zu %9s %9s %12s %8s\n", r.category.c_str(), r.n_test, fmt_opt(r.i_auroc).c_str(),
                fmt_opt(r.p_auroc).c_str(), threshold.c_str(), fmt_opt(r.f1).c_str());
  }
  if (!a.out.empty()) write_text_atomic(a.out, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string checkpoint;
  std::vector<std::size_t> shape = {28, 28, 1536};
  std::size_t hidden = 0;
  std::size_t iters = 10;
  std::size_t warmup = 2;
  std::vector<std::size_t> out_size = {224, 224};
  double smooth_sigma = 4.0;
  std::uint64_t seed = 0;
  std::string json_out;
};

int run_bench_cmd(const BenchArgs& a) {
  require(a.shape.size() == 3, ErrorCode::config, "--shape takes H0 W0 C");
  BenchOptions opt;
  opt.height = a.shape[0];
  opt.width = a.shape[1];
  opt.channels = a.shape[2];
  opt.iters = a.iters;
  opt.warmup = a.warmup;
  std::tie(opt.post.out_h, opt.post.out_w) = out_size_or(a.out_size, 224, 224);
  opt.post.smoothing_sigma = a.smooth_sigma;
  opt.seed = a.seed;
  require(opt.iters >= 1, ErrorCode::config, "--iters must be >= 1");
  require(opt.height >= 1 && opt.width >= 1 && opt.channels >= 1, ErrorCode::config, "--shape must be positive");

  ModelParams<float> model;
  if (!a.checkpoint.empty()) {
    model = read_checkpoint(a.checkpoint).model;
  } else {
    model = init_model(opt.channels, a.hidden == 0 ? opt.channels : a.hidden, AdaptorVariant::linear, a.seed);
    model.finalized = true;
  }
  const BenchReport report = run_bench(model, opt);
  std::fputs(report.to_table().c_str(), stdout);
  if (!a.json_out.empty()) write_text_atomic(a.json_out, report.to_json() + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
  std::vector<std::size_t> dims = {8, 8, 16};
  std::size_t configs = 20;
  std::uint64_t seed = 0;
  double step = 3e-4;
  double tolerance = 1e-4;
  bool corrupt = false;
};

int run_gradcheck_cmd(const GradcheckArgs& a) {
  require(a.dims.size() == 3, ErrorCode::config, "--dims takes C Hd batch");
  GradcheckOptions opt;
  opt.max_channels = a.dims[0];
  opt.max_hidden = a.dims[1];
  opt.max_batch = a.dims[2];
  opt.configs = a.configs;
  opt.seed = a.seed;
  opt.step = a.step;
  opt.tolerance = a.tolerance;
  opt.corrupt_gradient = a.corrupt;
  const GradcheckReport report = run_gradcheck(opt);
  std::cout << report.to_json() << "\n";
  if (!report.passed) {
    std::fprintf(stderr, "gradcheck: max relative error %.3g exceeds %.3g\n", report.max_rel_error, opt.tolerance);
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::vector<std::size_t> grid = {16, 16};
  SynthOptions opt;
};

int run_synth(SynthArgs a) {
  require(a.grid.size() == 2, ErrorCode::config, "--grid takes H0 W0");
  a.opt.grid_h = a.grid[0];
  a.opt.grid_w = a.grid[1];
  const SynthSummary s = generate_synthetic_dataset(a.opt, a.out_dir);
  std::cerr << "synth: " << s.n_train << " train, " << s.n_test << " test (" << s.n_anomalous
            << " anomalous), manifest " << s.manifest.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ProfileArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out;
  std::size_t bins = 50;
};

int run_profile(const ProfileArgs& a) {
  require(a.bins >= 1, ErrorCode::config, "--bins must be >= 1");
  const Checkpoint ck = read_checkpoint(a.checkpoint);
  const Manifest manifest = read_manifest(a.manifest);
  std::vector<FeatureTensor> local, adapted;
  for (const auto& s : load_split(manifest, Split::train, "")) {
    local.push_back(extract_local_features(s.stack, ck.pipeline));
    const auto& f = local.back();
    auto rows = adaptor_forward(ck.model.adaptor, as_rows<float>(f.data(), f.locations(), f.channels()));
    adapted.emplace_back(f.height(), f.width(), f.channels(), std::move(rows.data));
  }
  require(!local.empty(), ErrorCode::validation, "manifest has no training samples");
  const StdProfile before = std_profile(local, a.bins);
  const StdProfile after = std_profile(adapted, a.bins);
  std::string csv = "channel,std_local,std_adapted\n";
  for (std::size_t c = 0; c < before.stds.size(); ++c) {
    csv += std::to_string(c) + "," + fmt("%.9g", before.stds[c]) + "," + fmt("%.9g", after.stds[c]) + "\n";
  }
  if (a.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text_atomic(a.out, csv);
  }
  return kExitOk;
}

}  // namespace

void register_commands(CLI::App& app, Action& action) {
  auto bind = [&action](CLI::App* cmd, auto args, auto run) {
    cmd->callback([cmd, args, run, &action] {
      action = [cmd, args, run] {
        log_config(*cmd);
        return run(*args);
      };
    });
  };

  {
    auto args = std::make_shared<TrainArgs>();
    auto* cmd = app.add_subcommand("train", "Train the adaptor and discriminator on a manifest's train split");
    cmd->add_option("--manifest", args->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args->out, "Checkpoint to write")->required();
    cmd->add_option("--loss-csv", args->loss_csv, "Per-epoch loss CSV (default: <out>.loss.csv)");
    cmd->add_option("--category", args->category, "Only train on samples of this category");
    cmd->add_option("--sigma", args->sigma, "Noise std for anomalous features");
    cmd->add_option("--patch-size", args->patch_size, "Neighborhood size p");
    cmd->add_option("--levels", args->levels, "Hierarchy levels")->delimiter(',');
    cmd->add_option("--adaptor", args->adaptor, "Feature adaptor")->check(CLI::IsMember({"identity", "linear", "mlp"}));
    cmd->add_option("--loss", args->loss, "Loss")->check(CLI::IsMember({"trunc_l1", "ce"}));
    cmd->add_option("--epochs", args->epochs, "Training epochs");
    cmd->add_option("--batch", args->batch, "Images per batch");
    cmd->add_option("--seed", args->seed, "Seed for init, shuffling and noise");
    cmd->add_option("--lr-adaptor", args->lr_adaptor, "Adaptor learning rate");
    cmd->add_option("--lr-disc", args->lr_disc, "Discriminator learning rate");
    cmd->add_option("--weight-decay", args->weight_decay, "Weight decay");
    cmd->add_option("--th-pos", args->th_pos, "Positive hinge threshold");
    cmd->add_option("--th-neg", args->th_neg, "Negative hinge threshold");
    cmd->add_option("--hidden", args->hidden, "Discriminator hidden width (0: same as feature dim)");
    bind(cmd, args, run_train);
  }
  {
    auto args = std::make_shared<InferArgs>();
    auto* cmd = app.add_subcommand("infer", "Write anomaly maps and image scores");
    cmd->add_option("--checkpoint", args->checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--input", args->input, "Manifest or single SNFT feature file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", args->out_dir, "Output directory")->required();
    cmd->add_option("--map-format", args->map_format, "raw or gray8")->check(CLI::IsMember({"raw", "gray8"}));
    cmd->add_option("--split", args->split, "Manifest split: test, train or all");
    cmd->add_option("--smooth-sigma", args->smooth_sigma, "Gaussian smoothing sigma in output pixels");
    cmd->add_flag("--score-after-smoothing", args->score_after_smoothing, "Image score from the smoothed map");
    cmd->add_option("--out-size", args->out_size, "Output H W (default: manifest image size, else 224 224)")
        ->expected(2);
    cmd->add_option("--threads", args->threads, "Worker threads (0: all cores)");
    bind(cmd, args, run_infer);
  }
  {
    auto args = std::make_shared<EvalArgs>();
    auto* cmd = app.add_subcommand("eval", "I-AUROC, P-AUROC and best F1 per category");
    cmd->add_option("--checkpoint", args->checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--manifest", args->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args->out, "CSV to write");
    cmd->add_option("--category", args->category, "Only evaluate this category");
    cmd->add_option("--smooth-sigma", args->smooth_sigma, "Gaussian smoothing sigma in output pixels");
    cmd->add_flag("--score-after-smoothing", args->score_after_smoothing, "Image score from the smoothed map");
    cmd->add_option("--out-size", args->out_size, "Map H W (default: manifest image size)")->expected(2);
    cmd->add_option("--threads", args->threads, "Worker threads (0: all cores)");
    bind(cmd, args, run_eval);
  }
  {
    auto args = std::make_shared<BenchArgs>();
    auto* cmd = app.add_subcommand("bench", "Per-stage inference latency");
    cmd->add_option("--checkpoint", args->checkpoint, "Checkpoint (default: random model)")->check(CLI::ExistingFile);
    cmd->add_option("--shape", args->shape, "Local feature shape H0 W0 C")->expected(3);
    cmd->add_option("--hidden", args->hidden, "Hidden width of the random model (0: C)");
    cmd->add_option("--iters", args->iters, "Timed iterations");
    cmd->add_option("--warmup", args->warmup, "Untimed warmup iterations");
    cmd->add_option("--out-size", args->out_size, "Post-processing output H W")->expected(2);
    cmd->add_option("--smooth-sigma", args->smooth_sigma, "Gaussian smoothing sigma");
    cmd->add_option("--seed", args->seed, "Seed for the random input and model");
    cmd->add_option("--json", args->json_out, "Also write the report as JSON");
    bind(cmd, args, run_bench_cmd);
  }
  {
    auto args = std::make_shared<GradcheckArgs>();
    auto* cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    cmd->add_option("--dims", args->dims, "Max C, Hd and batch")->expected(3);
    cmd->add_option("--configs", args->configs, "Random configurations");
    cmd->add_option("--seed", args->seed, "Seed");
    cmd->add_option("--step", args->step, "Finite-difference step");
    cmd->add_option("--tolerance", args->tolerance, "Max allowed relative error");
    cmd->add_flag("--corrupt-gradient", args->corrupt, "Test hook: perturb one analytic gradient")->group("");
    bind(cmd, args, run_gradcheck_cmd);
  }
  {
    auto args = std::make_shared<SynthArgs>();
    auto* cmd = app.add_subcommand("synth", "Generate a synthetic feature dataset");
    cmd->add_option("--out-dir", args->out_dir, "Output directory")->required();
    cmd->add_option("--n-train", args->opt.n_train, "Normal training maps");
    cmd->add_option("--n-test", args->opt.n_test, "Test maps");
    cmd->add_option("--grid", args->grid, "Grid H0 W0")->expected(2);
    cmd->add_option("--channels", args->opt.channels, "Total channels over both levels (even)");
    cmd->add_option("--defect-rate", args->opt.defect_rate, "Fraction of anomalous test maps");
    cmd->add_option("--shift", args->opt.shift, "Defect shift length");
    cmd->add_option("--feature-std", args->opt.feature_std, "Per-channel std of normal features");
    cmd->add_option("--image-scale", args->opt.image_scale, "Mask pixels per grid cell");
    cmd->add_option("--seed", args->opt.seed, "Seed");
    cmd->add_option("--dataset", args->opt.dataset, "Dataset and category name");
    bind(cmd, args, run_synth);
  }
  {
    auto args = std::make_shared<ProfileArgs>();
    auto* cmd = app.add_subcommand("profile", "Per-channel std of local and adapted training features");
    cmd->add_option("--checkpoint", args->checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--manifest", args->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--bins", args->bins, "Histogram bins");
    cmd->add_option("--out", args->out, "CSV to write (default: stdout)");
    bind(cmd, args, run_profile);
  }
}

}  // namespace snet

#include "simplenet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <json.hpp>

#include "simplenet/error.hpp"
#include "simplenet/rng.hpp"

namespace simplenet {

namespace {

struct Problem {
  ModelParams<double> model;
  Matrix<double> features;
  Matrix<double> noise;
  LossKind loss = LossKind::truncated_l1;
  double th_pos = 0.5;
  double th_neg = -0.5;
};

// Which side of every kink the evaluation sits on: mlp hidden pre-activations,
// batch-norm outputs feeding the leaky relu, and the two hinges.
using Pattern = std::vector<bool>;

struct Evaluation {
  double loss = 0.0;
  Pattern pattern;
};

Evaluation evaluate(const Problem& p) {
  ModelParams<double> model = p.model;
  auto fwd = head_forward_train(model, p.features, p.noise);
  Evaluation e;
  for (double v : fwd.cache.adaptor.hidden_pre.data) e.pattern.push_back(v > 0.0);
  for (double v : fwd.cache.discriminator.bn_out.data) e.pattern.push_back(v > 0.0);

  const std::size_t n = p.features.rows;
  std::span<const double> scores(fwd.scores);
  if (p.loss == LossKind::truncated_l1) {
    for (std::size_t i = 0; i < n; ++i) e.pattern.push_back(p.th_pos - scores[i] > 0.0);
    for (std::size_t i = n; i < 2 * n; ++i) e.pattern.push_back(scores[i] - p.th_neg > 0.0);
    e.loss = truncated_l1_loss<double>(scores.first(n), scores.subspan(n), p.th_pos, p.th_neg).loss;
  } else {
    e.loss = cross_entropy_loss<double>(scores.first(n), scores.subspan(n)).loss;
  }
  return e;
}

HeadGrads<double> analytic(const Problem& p) {
  ModelParams<double> model = p.model;
  auto fwd = head_forward_train(model, p.features, p.noise);
  const std::size_t n = p.features.rows;
  std::span<const double> scores(fwd.scores);
  auto loss = p.loss == LossKind::truncated_l1
                  ? truncated_l1_loss<double>(scores.first(n), scores.subspan(n), p.th_pos, p.th_neg)
                  : cross_entropy_loss<double>(scores.first(n), scores.subspan(n));
  std::vector<double> g = loss.pos_grads;
  g.insert(g.end(), loss.neg_grads.begin(), loss.neg_grads.end());
  // The cache revisions match `model`, whose trainable values equal p.model's.
  return head_backward(model.adaptor, model.discriminator, fwd.cache, std::span<const double>(g));
}

Problem draw_problem(RandomStream& rng, std::size_t channels, std::size_t hidden, std::size_t batch,
                     AdaptorVariant variant, LossKind loss) {
  // Parameters are drawn as 32-bit values and evaluated in 64-bit.
  ModelParams<float> m = init_model(channels, hidden, variant, rng.below(UINT64_MAX));
  auto jitter = [&](std::span<float> values, double scale) {
    for (auto& v : values) v = static_cast<float>(v + scale * rng.normal());
  };
  jitter(m.adaptor.weight.data, 0.3);
  if (variant == AdaptorVariant::mlp) jitter(m.adaptor.weight2.data, 0.3);
  auto& d = m.discriminator;
  jitter(d.b1, 0.2);
  for (auto& g : d.bn_gamma) g = static_cast<float>(rng.uniform(0.5, 1.5));
  jitter(d.bn_beta, 0.3);
  jitter(d.w2, 0.5);
  d.b2 = static_cast<float>(0.3 * rng.normal());

  Problem p;
  p.model = model_cast<double>(m);
  p.loss = loss;
  p.features = Matrix<double>(batch, channels);
  p.noise = Matrix<double>(batch, channels);
  for (auto& v : p.features.data) v = static_cast<float>(rng.normal());
  for (auto& v : p.noise.data) v = static_cast<float>(0.3 * rng.normal());
  return p;
}

struct CaseCheck {
  double max_rel = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// nullopt when some perturbation crosses a kink.
std::optional<CaseCheck> check_problem(Problem p, const GradcheckOptions& opt) {
  const Pattern base = evaluate(p).pattern;
  HeadGrads<double> grads = analytic(p);
  auto params = trainable_parameters(p.model.adaptor);
  auto disc_params = trainable_parameters(p.model.discriminator);
  params.insert(params.end(), disc_params.begin(), disc_params.end());
  auto views = gradient_views(grads.adaptor, p.model.adaptor.variant);
  auto disc_views = gradient_views(grads.discriminator);
  views.insert(views.end(), disc_views.begin(), disc_views.end());
  require(params.size() == views.size(), ErrorCode::internal, "gradcheck: parameter/gradient lists differ");
  if (opt.corrupt_gradient && !views.empty() && !views.front().values.empty()) {
    views.front().values[0] += 1e-2 + std::abs(views.front().values[0]);
  }

  CaseCheck result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto values = params[t].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      // Central differences at h and h/2, Richardson-combined to cancel the h^2 term.
      const double original = values[i];
      double central[2];
      for (int k = 0; k < 2; ++k) {
        const double h = k == 0 ? opt.step : 0.5 * opt.step;
        values[i] = original + h;
        const Evaluation plus = evaluate(p);
        values[i] = original - h;
        const Evaluation minus = evaluate(p);
        values[i] = original;
        if (plus.pattern != base || minus.pattern != base) return std::nullopt;
        central[k] = (plus.loss - minus.loss) / (2.0 * h);
      }
      const double numeric = (4.0 * central[1] - central[0]) / 3.0;
      const double rel = relative_error(views[t].values[i], numeric, opt.abs_floor);
      ++result.checked;
      if (result.worst.empty() || rel > result.max_rel) {
        result.max_rel = rel;
        result.worst = std::string(params[t].name) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

// Loss gradients with respect to raw scores, away from the hinge kinks.
double check_losses(RandomStream& rng, const GradcheckOptions& opt) {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + rng.below(16);
    std::vector<double> pos(n), neg(n);
    auto away_from = [&](double threshold) {
      double v;
      do {
        v = 2.0 * rng.normal();
      } while (std::abs(v - threshold) < 10.0 * opt.step);
      return v;
    };
    for (auto& v : pos) v = away_from(0.5);
    for (auto& v : neg) v = away_from(-0.5);

    for (LossKind kind : {LossKind::truncated_l1, LossKind::cross_entropy}) {
      auto eval = [&](const std::vector<double>& p, const std::vector<double>& q) {
        return kind == LossKind::truncated_l1
                   ? truncated_l1_loss<double>(p, q, 0.5, -0.5)
                   : cross_entropy_loss<double>(p, q);
      };
      const auto base = eval(pos, neg);
      for (int side = 0; side < 2; ++side) {
        auto& scores = side == 0 ? pos : neg;
        const auto& grads = side == 0 ? base.pos_grads : base.neg_grads;
        for (std::size_t i = 0; i < n; ++i) {
          const double original = scores[i];
          scores[i] = original + opt.step;
          const double plus = eval(pos, neg).loss;
          scores[i] = original - opt.step;
          const double minus = eval(pos, neg).loss;
          scores[i] = original;
          worst = std::max(worst, relative_error(grads[i], (plus - minus) / (2.0 * opt.step), opt.abs_floor));
        }
      }
    }
  }
  return worst;
}

}  // namespace

double relative_error(double analytic_value, double numeric, double abs_floor) {
  const double denom = std::max({std::abs(analytic_value), std::abs(numeric), abs_floor});
  return std::abs(analytic_value - numeric) / denom;
}

GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
  require(opt.configs >= 1, ErrorCode::config, "gradcheck needs at least one config");
  require(opt.max_channels >= 1 && opt.max_hidden >= 1 && opt.max_batch >= 1, ErrorCode::config,
          "gradcheck dimensions must be >= 1");
  require(opt.step > 0.0 && opt.tolerance > 0.0, ErrorCode::config, "gradcheck step and tolerance must be positive");

  constexpr AdaptorVariant kVariants[] = {AdaptorVariant::linear, AdaptorVariant::mlp, AdaptorVariant::identity};
  constexpr LossKind kLosses[] = {LossKind::truncated_l1, LossKind::cross_entropy};
  constexpr std::size_t kMaxRedraws = 200;

  GradcheckReport report;
  report.tolerance = opt.tolerance;
  RandomStream loss_rng(opt.seed, StreamId::gradcheck, std::uint64_t{1} << 40);
  report.loss_max_rel_error = check_losses(loss_rng, opt);
  report.max_rel_error = report.loss_max_rel_error;

  for (std::size_t index = 0; index < opt.configs; ++index) {
    // Each config gets its own block range so configs are independent of each other.
    RandomStream rng(opt.seed, StreamId::gradcheck, index << 24);
    GradcheckCase c;
    c.index = index;
    c.variant = kVariants[index % 3];
    c.loss = kLosses[(index / 3) % 2];
    std::optional<CaseCheck> check;
    while (!check) {
      require(c.redraws < kMaxRedraws, ErrorCode::numerical_check,
              "gradcheck could not draw a kink-free config");
      c.channels = 1 + rng.below(opt.max_channels);
      c.hidden = 1 + rng.below(opt.max_hidden);
      // At least two normal vectors, so batch-norm sees four rows.
      c.batch = opt.max_batch < 2 ? opt.max_batch : 2 + rng.below(opt.max_batch - 1);
      check = check_problem(draw_problem(rng, c.channels, c.hidden, c.batch, c.variant, c.loss), opt);
      if (!check) ++c.redraws;
    }
    c.parameters_checked = check->checked;
    c.max_rel_error = check->max_rel;
    c.worst_parameter = check->worst;
    report.max_rel_error = std::max(report.max_rel_error, c.max_rel_error);
    report.cases.push_back(std::move(c));
  }
  report.passed = report.max_rel_error < opt.tolerance;
  return report;
}

std::string GradcheckReport::to_json() const {
  nlohmann::json doc;
  doc["passed"] = passed;
  doc["max_rel_error"] = max_rel_error;
  doc["tolerance"] = tolerance;
  doc["loss_max_rel_error"] = loss_max_rel_error;
  doc["configs"] = nlohmann::json::array();
  for (const auto& c : cases) {
    doc["configs"].push_back({{"index", c.index},
                              {"channels", c.channels},
                              {"hidden", c.hidden},
                              {"batch", c.batch},
                              {"adaptor", std::string(to_string(c.variant))},
                              {"loss", std::string(to_string(c.loss))},
                              {"parameters_checked", c.parameters_checked},
                              {"redraws", c.redraws},
                              {"max_rel_error", c.max_rel_error},
                              {"worst_parameter", c.worst_parameter}});
  }
  return doc.dump(2);
}

}  // namespace simplenet

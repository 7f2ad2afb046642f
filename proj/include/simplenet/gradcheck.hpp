#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "simplenet/model.hpp"
#include "simplenet/training.hpp"

namespace simplenet {

struct GradcheckOptions {
  std::size_t configs = 20;
  std::size_t max_channels = 8;
  std::size_t max_hidden = 8;
  std::size_t max_batch = 16;  // normal vectors per step; the discriminator sees twice this
  std::uint64_t seed = 0;
  double step = 3e-4;  // larger of the two Richardson steps
  double tolerance = 1e-4;
  /// Denominator floor for the relative error of near-zero gradients.
  double abs_floor = 1e-6;
  /// Test hook: perturbs one analytic gradient so the check must fail.
  bool corrupt_gradient = false;
};

struct GradcheckCase {
  std::size_t index = 0;
  std::size_t channels = 0;
  std::size_t hidden = 0;
  std::size_t batch = 0;
  AdaptorVariant variant = AdaptorVariant::linear;
  LossKind loss = LossKind::truncated_l1;
  std::size_t parameters_checked = 0;
  std::size_t redraws = 0;  // configs discarded because a perturbation crossed a kink
  double max_rel_error = 0.0;
  std::string worst_parameter;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;
  /// Loss gradients w.r.t. raw scores, both loss kinds.
  double loss_max_rel_error = 0.0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  std::string to_json() const;
};

double relative_error(double analytic, double numeric, double abs_floor);

GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace simplenet

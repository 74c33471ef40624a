// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/optim/schedule.hpp"

#include <cmath>
#include <string>

namespace bioner::optim {

void Schedule::validate() const {
  if (!(peak_lr > 0.0)) throw OptimizerError("schedule peak_lr must be positive");
  if (warmup_steps == 0 || warmup_steps >= total_steps) {
    throw OptimizerError("schedule needs 0 < warmup_steps < total_steps (got " + std::to_string(warmup_steps) +
                         ", " + std::to_string(total_steps) + ")");
  }
}

double lr_at(const Schedule& schedule, std::size_t step) {
  schedule.validate();
  if (step > schedule.total_steps) {
    throw OptimizerError("step " + std::to_string(step) + " beyond total_steps " +
                         std::to_string(schedule.total_steps));
  }
  const auto s = static_cast<double>(step);
  const auto w = static_cast<double>(schedule.warmup_steps);
  const auto total = static_cast<double>(schedule.total_steps);
  if (step <= schedule.warmup_steps) return schedule.peak_lr * s / w;
  return schedule.peak_lr * (total - s) / (total - w);
}

double rescaled_peak(double base_lr) {
  if (!(base_lr > 0.0)) throw OptimizerError("rescaled_peak: base learning rate must be positive");
  return base_lr * std::pow(2.0, -1.5);
}

}  // namespace bioner::optim

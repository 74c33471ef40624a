// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>

namespace bioner::optim {

class OptimizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear warmup from 0 to peak_lr over warmup_steps, then linear decay to
/// 0 at total_steps.
struct Schedule {
  double peak_lr = 0.0;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 0;

  void validate() const;
};

double lr_at(const Schedule& schedule, std::size_t step);

/// base_lr * 2^-1.5, the peak used when a run at base_lr diverges.
double rescaled_peak(double base_lr);

}  // namespace bioner::optim

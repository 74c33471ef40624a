// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "bioner/model/parameters.hpp"
#include "bioner/optim/schedule.hpp"

namespace bioner::optim {

struct Hyperparameters {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double weight_decay = 0.01;
};

inline constexpr double kMaxTrustRatio = 10.0;

/// First and second moments per parameter tensor plus the step counter.
/// Moments are created lazily (zero) on the first step.
template <typename T>
struct OptimizerState {
  Hyperparameters hyper;
  model::ParameterSet<T> m;
  model::ParameterSet<T> v;
  std::size_t step = 0;

  /// "m/<name>" and "v/<name>" tensors, as stored in checkpoints.
  model::ParameterSet<T> to_tensors() const;
  static OptimizerState from_tensors(const model::ParameterSet<T>& tensors, std::size_t step, Hyperparameters hyper);
};

/// Decoupled weight decay, skipped for biases and norm parameters:
///   p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
/// Throws OptimizerError (with nothing modified) on a non-finite gradient
/// or a gradient/parameter shape mismatch.
template <typename T>
void adamw_step(OptimizerState<T>& state, model::ParameterSet<T>& params, const model::ParameterSet<T>& grads,
                double lr);

/// Layer-wise trust ratio on top of the AdamW direction u:
///   r = ||p|| / ||u|| clipped to [0, 10] (1 if either norm is 0)
///   p -= lr * r * u
template <typename T>
void lamb_step(OptimizerState<T>& state, model::ParameterSet<T>& params, const model::ParameterSet<T>& grads,
               double lr);

}  // namespace bioner::optim

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Masked-LM + sentence-order pretraining (LAMB by default). The example set is fixed
// up front; step s consumes stream positions [(s-1)*B, s*B) of a seeded
// epoch shuffle and dropout stream derive(seed, "dropout", s), so a run is
// fully determined by (examples, seed, step) and resumes from any saved step.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>

#include "bioner/corpus/examples.hpp"
#include "bioner/model/checkpoint.hpp"
#include "bioner/model/config.hpp"
#include "bioner/model/parameters.hpp"
#include "bioner/optim/optimizer.hpp"
#include "bioner/optim/train_log.hpp"

namespace bioner::pretrain {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { kLamb, kAdamW };

struct PretrainOptions {
  OptimizerKind optimizer = OptimizerKind::kLamb;
  std::size_t batch_size = 1024;
  std::size_t eval_batch_size = 16;
  double learning_rate = 0.00176;
  std::size_t train_steps = 200000;
  std::size_t warmup_steps = 3125;
  std::size_t save_every = 1000;
  std::size_t eval_every = 1000;  // held-out evaluation interval
  double weight_decay = 0.01;
  std::uint64_t seed = 12345;
  /// Identity of the example set (see fingerprint); checked on resume.
  std::uint64_t data_fingerprint = 0;

  void validate() const;
};

/// FNV-1a over every field of every example, in order.
std::uint64_t fingerprint(std::span<const corpus::PretrainExample> examples);

template <typename T>
struct TrainState {
  model::ModelConfig config;
  model::ParameterSet<T> params;
  optim::OptimizerState<T> optimizer;
  std::size_t step = 0;

  static TrainState fresh(const model::ModelConfig& config, const PretrainOptions& options);

  /// Stores parameters, "optim/" moments, and the step and run identity
  /// (seed, batch size, data fingerprint) as metadata.
  model::Checkpoint<T> to_checkpoint(const PretrainOptions& options) const;
  /// Throws TrainError when the checkpoint came from a run with another
  /// seed, batch size or example set, or lacks training metadata.
  static TrainState resume(model::Checkpoint<T> ckpt, const PretrainOptions& options);
};

struct HeldOutScores {
  double mlm_loss = 0.0;  // mean over masked positions
  double sop_loss = 0.0;  // mean over examples
  double mlm_accuracy = 0.0;
  double sop_accuracy = 0.0;
};

template <typename T>
HeldOutScores evaluate(const model::ParameterSet<T>& params, const model::ModelConfig& config,
                       std::span<const corpus::PretrainExample> examples, std::size_t batch_size);

template <typename T>
struct TrainHooks {
  optim::LogSink log;
  /// Called after every save_every-th step and after the last step.
  std::function<void(const TrainState<T>&)> checkpoint;
  /// Polled after each step; returning true ends the run early (after the
  /// checkpoint hook for that step, if due).
  std::function<bool(std::size_t step)> stop;
};

/// Advances `state` from state.step to options.train_steps. Held-out
/// scores are logged every eval_every steps and at the end when
/// `held_out` is non-empty.
template <typename T>
void train(TrainState<T>& state, std::span<const corpus::PretrainExample> examples,
           std::span<const corpus::PretrainExample> held_out, const PretrainOptions& options,
           const TrainHooks<T>& hooks = {});

}  // namespace bioner::pretrain

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Token-classification fine-tuning: AdamW on a linear warmup/decay
// schedule, dev entity-F1 every `eval_every` steps, best-dev selection,
// final test scores from the selected parameters.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bioner/model/checkpoint.hpp"
#include "bioner/model/config.hpp"
#include "bioner/model/parameters.hpp"
#include "bioner/ner/conll.hpp"
#include "bioner/ner/metrics.hpp"
#include "bioner/optim/train_log.hpp"
#include "bioner/tokenizer/vocab.hpp"

namespace bioner::ner {

struct FinetuneOptions {
  std::size_t batch_size = 32;
  std::size_t eval_batch_size = 16;
  double learning_rate = 1e-5;
  std::size_t train_steps = 5336;
  std::size_t warmup_steps = 320;
  std::size_t eval_every = 200;
  std::size_t max_seq_length = 512;
  bool lower_case = true;
  double weight_decay = 0.01;
  std::uint64_t seed = 12345;

  void validate() const;
};

/// A fine-tuned tagger: encoder, NER head, and how its inputs were built.
template <typename T>
struct NerModel {
  model::ModelConfig config;
  model::ParameterSet<T> params;
  LabelSet labels;
  bool lower_case = true;
  std::size_t max_seq_length = 512;

  model::Checkpoint<T> to_checkpoint() const;
  /// Throws ConllError when the checkpoint has no NER head or metadata.
  static NerModel from_checkpoint(model::Checkpoint<T> ckpt);
};

template <typename T>
struct FinetuneResult {
  NerModel<T> best;
  std::size_t best_step = 0;
  EvaluationReport best_dev;
  std::optional<EvaluationReport> test;  // empty when no test sentences
};

/// Labels seen in any split; throws ConllError if dev or test use an
/// entity type that never occurs in train.
LabelSet combined_label_set(std::span<const NerExample> train, std::span<const NerExample> dev,
                            std::span<const NerExample> test);

/// Called with the new best model each time dev F1 strictly improves.
template <typename T>
using BestModelHook = std::function<void(const NerModel<T>&, std::size_t step)>;

/// Starts from `pretrained` (its pretraining heads are dropped). Throws
/// model::ConfigMismatch when the vocabulary size differs from the
/// checkpoint config. `pretrained` is not modified.
template <typename T>
FinetuneResult<T> finetune(const model::Checkpoint<T>& pretrained, const tokenizer::Vocab& vocab,
                           std::span<const NerExample> train, std::span<const NerExample> dev,
                           std::span<const NerExample> test, const FinetuneOptions& options,
                           const optim::LogSink& log = {}, const BestModelHook<T>& on_best = {});

/// Labels by argmax over each word's first-piece scores. Words cut by
/// truncation are labelled "O". Input labels are ignored.
template <typename T>
std::vector<NerExample> predict(const NerModel<T>& model, const tokenizer::Vocab& vocab,
                                std::span<const NerExample> sentences, std::size_t batch_size = 16);

}  // namespace bioner::ner

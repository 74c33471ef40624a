// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// The encoder: factorized embeddings (size E, projected to H), one
// transformer block applied num_layers times, and the pooler / masked-LM /
// sentence-order / token-classification heads. Every function that returns
// gradients ACCUMULATES into `grads`, which must have the same names and
// shapes as `params` (see ParameterSet::zeros_like).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bioner/corpus/examples.hpp"
#include "bioner/model/config.hpp"
#include "bioner/model/parameters.hpp"
#include "bioner/numerics/rng.hpp"
#include "bioner/numerics/tensor.hpp"
#include "bioner/tokenizer/input.hpp"

namespace bioner::model {

/// A batch of equal-length input rows, flattened row-major (batch x seq).
struct Batch {
  std::size_t batch_size = 0;
  std::size_t seq_len = 0;
  std::vector<std::int32_t> token_ids;
  std::vector<std::int32_t> type_ids;
  std::vector<std::int32_t> attention_mask;

  /// With trim_padding, trailing columns that are padding in every row are
  /// dropped; attention masking makes the result identical on the
  /// remaining positions.
  static Batch from_sequences(std::span<const tokenizer::InputSequence> rows, bool trim_padding = false);
  std::size_t tokens() const { return batch_size * seq_len; }
};

/// Masked-LM and sentence-order targets for a batch.
struct PretrainTargets {
  std::vector<std::size_t> mlm_rows;  // flattened batch * seq_len + position
  std::vector<std::int32_t> mlm_labels;
  std::vector<std::int32_t> sop_labels;  // one per batch item
};

/// Builds the batch and targets from pretraining examples of equal length.
std::pair<Batch, PretrainTargets> collate(std::span<const corpus::PretrainExample> examples,
                                          bool trim_padding = false);

template <typename T>
struct PretrainLoss {
  T mlm_loss{};
  T sop_loss{};
  T total{};
  /// Argmax hits, for held-out accuracy.
  std::size_t mlm_correct = 0;
  std::size_t sop_correct = 0;
};

/// Final hidden states, shape batch x seq x hidden.
template <typename T>
Tensor<T> encode_forward(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch);

template <typename T>
PretrainLoss<T> pretrain_loss(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch,
                              const PretrainTargets& targets);

/// `dropout_rng` is used only when config.dropout_rate > 0; without it the
/// pass runs in inference mode (no dropout), as do the loss-only functions.
template <typename T>
PretrainLoss<T> pretrain_loss_and_gradients(const ParameterSet<T>& params, const ModelConfig& config,
                                            const Batch& batch, const PretrainTargets& targets,
                                            ParameterSet<T>& grads, Rng* dropout_rng = nullptr);

/// Per-token label scores, shape batch x seq x labels. Requires heads.ner.
template <typename T>
Tensor<T> token_logits(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch);

/// Mean cross-entropy over positions whose label is not ops::kIgnoreIndex.
/// `labels` has one entry per batch token.
template <typename T>
T token_classification_loss(const ParameterSet<T>& params, const ModelConfig& config, const Batch& batch,
                            std::span<const std::int32_t> labels);

template <typename T>
T token_classification_loss_and_gradients(const ParameterSet<T>& params, const ModelConfig& config,
                                          const Batch& batch, std::span<const std::int32_t> labels,
                                          ParameterSet<T>& grads, Rng* dropout_rng = nullptr);

}  // namespace bioner::model

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace bioner::model {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::size_t vocab_size = 30000;
  std::size_t embedding_size = 128;
  std::size_t hidden_size = 768;
  std::size_t num_layers = 12;
  std::size_t num_heads = 12;
  std::size_t intermediate_size = 3072;
  std::size_t max_positions = 512;
  std::size_t type_vocab_size = 2;
  bool share_parameters = true;
  double dropout_rate = 0.0;
  double layer_norm_eps = 1e-12;

  /// Base column of the pretraining hyperparameter table.
  static ModelConfig base();
  /// Large column of the same table.
  static ModelConfig large();

  std::size_t head_size() const { return hidden_size / num_heads; }

  /// Throws ModelError naming the violated constraint.
  void validate() const;

  std::map<std::string, std::string> to_map() const;
  static ModelConfig from_map(const std::map<std::string, std::string>& kv);

  bool operator==(const ModelConfig&) const = default;
};

/// Which optional parameter groups exist next to the encoder.
struct HeadSet {
  bool pooler = true;
  bool mlm = true;
  bool sop = true;
  std::size_t ner_labels = 0;  // 0 = no token-classification head

  static HeadSet pretraining() { return {}; }
  static HeadSet encoder_only() { return {false, false, false, 0}; }

  bool operator==(const HeadSet&) const = default;
};

}  // namespace bioner::model

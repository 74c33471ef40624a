// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bioner/model/config.hpp"
#include "bioner/numerics/rng.hpp"
#include "bioner/numerics/tensor.hpp"

namespace bioner::model {

/// Named tensors, iterated in name order.
template <typename T>
class ParameterSet {
 public:
  using Map = std::map<std::string, Tensor<T>, std::less<>>;

  Tensor<T>& at(std::string_view name);
  const Tensor<T>& at(std::string_view name) const;
  bool contains(std::string_view name) const { return tensors_.find(name) != tensors_.end(); }

  void insert(std::string name, Tensor<T> tensor);
  void erase(std::string_view name);

  std::size_t size() const { return tensors_.size(); }
  std::size_t element_count() const;

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  /// Same names and shapes, all zeros.
  ParameterSet zeros_like() const;
  void set_zero();
  bool all_finite() const;

  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& [name, t] : tensors_) out.insert(name, t.template cast<U>());
    return out;
  }

  bool operator==(const ParameterSet&) const = default;

 private:
  Map tensors_;
};

namespace names {
inline constexpr std::string_view kTokenEmbedding = "embeddings.token";
inline constexpr std::string_view kPositionEmbedding = "embeddings.position";
inline constexpr std::string_view kTypeEmbedding = "embeddings.type";
inline constexpr std::string_view kEmbeddingNorm = "embeddings.norm";
inline constexpr std::string_view kEmbeddingProjection = "embeddings.projection";
inline constexpr std::string_view kPooler = "pooler";
inline constexpr std::string_view kMlmDense = "heads.mlm.dense";
inline constexpr std::string_view kMlmNorm = "heads.mlm.norm";
inline constexpr std::string_view kMlmOutputBias = "heads.mlm.output_bias";
inline constexpr std::string_view kSop = "heads.sop";
inline constexpr std::string_view kNer = "heads.ner";

// Suffixes inside a block.
inline constexpr std::string_view kQuery = "attention.query";
inline constexpr std::string_view kKey = "attention.key";
inline constexpr std::string_view kValue = "attention.value";
inline constexpr std::string_view kAttentionOutput = "attention.output";
inline constexpr std::string_view kAttentionNorm = "attention.norm";
inline constexpr std::string_view kFfnIn = "ffn.in";
inline constexpr std::string_view kFfnOut = "ffn.out";
inline constexpr std::string_view kFfnNorm = "ffn.norm";

/// "encoder.shared" when parameters are shared, else "encoder.layer<i>".
std::string block_prefix(const ModelConfig& config, std::size_t layer);

inline std::string weight(std::string_view base) { return std::string(base) + ".weight"; }
inline std::string bias(std::string_view base) { return std::string(base) + ".bias"; }
inline std::string gain(std::string_view base) { return std::string(base) + ".gain"; }
inline std::string join(std::string_view prefix, std::string_view leaf) {
  return std::string(prefix) + "." + std::string(leaf);
}
}  // namespace names

/// True for biases and layer-norm gains/biases (no weight decay, zero/one
/// initialization).
bool is_bias_or_norm(std::string_view name);

/// Every tensor the config defines, in a fixed order. The masked-LM output
/// projection is tied to embeddings.token and has no entry of its own.
std::vector<std::pair<std::string, Shape>> parameter_inventory(const ModelConfig& config, const HeadSet& heads);

std::size_t count_parameters(const ModelConfig& config, const HeadSet& heads);

inline constexpr double kInitStddev = 0.02;
inline constexpr double kInitClip = 2.0;  // in standard deviations

/// Weights ~ normal(0, 0.02) truncated at two standard deviations; biases
/// zero; norm gains one. Draws follow inventory order.
template <typename T>
ParameterSet<T> init_parameters(const ModelConfig& config, const HeadSet& heads, Rng& rng);

/// Adds freshly initialized tensors for every inventory entry missing from
/// `params` (e.g. a token-classification head on a pretrained encoder).
template <typename T>
void init_missing_parameters(ParameterSet<T>& params, const ModelConfig& config, const HeadSet& heads, Rng& rng);

/// Throws ModelError unless `params` holds exactly the inventory of
/// (config, heads) with matching shapes.
template <typename T>
void check_parameters(const ParameterSet<T>& params, const ModelConfig& config, const HeadSet& heads);

}  // namespace bioner::model

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/model/parameters.hpp"

#include <set>

namespace bioner::model {

template <typename T>
Tensor<T>& ParameterSet<T>::at(std::string_view name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ModelError("no parameter named '" + std::string(name) + "'");
  return it->second;
}

template <typename T>
const Tensor<T>& ParameterSet<T>::at(std::string_view name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ModelError("no parameter named '" + std::string(name) + "'");
  return it->second;
}

template <typename T>
void ParameterSet<T>::insert(std::string name, Tensor<T> tensor) {
  tensors_.insert_or_assign(std::move(name), std::move(tensor));
}

template <typename T>
void ParameterSet<T>::erase(std::string_view name) {
  auto it = tensors_.find(name);
  if (it != tensors_.end()) tensors_.erase(it);
}

template <typename T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

template <typename T>
ParameterSet<T> ParameterSet<T>::zeros_like() const {
  ParameterSet out;
  for (const auto& [name, t] : tensors_) out.insert(name, Tensor<T>(t.shape()));
  return out;
}

template <typename T>
void ParameterSet<T>::set_zero() {
  for (auto& [name, t] : tensors_) t.fill(T{0});
}

template <typename T>
bool ParameterSet<T>::all_finite() const {
  for (const auto& [name, t] : tensors_) {
    if (!t.all_finite()) return false;
  }
  return true;
}

template class ParameterSet<float>;
template class ParameterSet<double>;

namespace names {
std::string block_prefix(const ModelConfig& config, std::size_t layer) {
  return config.share_parameters ? std::string("encoder.shared") : "encoder.layer" + std::to_string(layer);
}
}  // namespace names

bool is_bias_or_norm(std::string_view name) {
  return name.ends_with("bias") || name.ends_with(".gain");
}

std::vector<std::pair<std::string, Shape>> parameter_inventory(const ModelConfig& config, const HeadSet& heads) {
  config.validate();
  const std::size_t V = config.vocab_size;
  const std::size_t E = config.embedding_size;
  const std::size_t H = config.hidden_size;
  const std::size_t I = config.intermediate_size;

  std::vector<std::pair<std::string, Shape>> inv;
  auto linear = [&inv](std::string_view base, std::size_t in, std::size_t out) {
    inv.emplace_back(names::weight(base), Shape{in, out});
    inv.emplace_back(names::bias(base), Shape{out});
  };
  auto norm = [&inv](std::string_view base, std::size_t n) {
    inv.emplace_back(names::gain(base), Shape{n});
    inv.emplace_back(names::bias(base), Shape{n});
  };

  inv.emplace_back(std::string(names::kTokenEmbedding), Shape{V, E});
  inv.emplace_back(std::string(names::kPositionEmbedding), Shape{config.max_positions, E});
  inv.emplace_back(std::string(names::kTypeEmbedding), Shape{config.type_vocab_size, E});
  norm(names::kEmbeddingNorm, E);
  linear(names::kEmbeddingProjection, E, H);

  const std::size_t blocks = config.share_parameters ? 1 : config.num_layers;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::string p = names::block_prefix(config, b);
    linear(names::join(p, names::kQuery), H, H);
    linear(names::join(p, names::kKey), H, H);
    linear(names::join(p, names::kValue), H, H);
    linear(names::join(p, names::kAttentionOutput), H, H);
    norm(names::join(p, names::kAttentionNorm), H);
    linear(names::join(p, names::kFfnIn), H, I);
    linear(names::join(p, names::kFfnOut), I, H);
    norm(names::join(p, names::kFfnNorm), H);
  }

  if (heads.pooler) linear(names::kPooler, H, H);
  if (heads.mlm) {
    linear(names::kMlmDense, H, E);
    norm(names::kMlmNorm, E);
    inv.emplace_back(std::string(names::kMlmOutputBias), Shape{V});
  }
  if (heads.sop) linear(names::kSop, H, 2);
  if (heads.ner_labels > 0) linear(names::kNer, H, heads.ner_labels);
  return inv;
}

std::size_t count_parameters(const ModelConfig& config, const HeadSet& heads) {
  std::size_t n = 0;
  for (const auto& [name, shape] : parameter_inventory(config, heads)) n += shape_size(shape);
  return n;
}

namespace {

template <typename T>
Tensor<T> init_tensor(const std::string& name, const Shape& shape, Rng& rng) {
  if (name.ends_with(".gain")) return Tensor<T>(shape, T{1});
  if (is_bias_or_norm(name)) return Tensor<T>(shape, T{0});
  Tensor<T> t(shape);
  for (T& v : t.values()) v = static_cast<T>(rng.truncated_normal(kInitStddev, kInitClip));
  return t;
}

}  // namespace

template <typename T>
ParameterSet<T> init_parameters(const ModelConfig& config, const HeadSet& heads, Rng& rng) {
  ParameterSet<T> params;
  for (const auto& [name, shape] : parameter_inventory(config, heads)) {
    params.insert(name, init_tensor<T>(name, shape, rng));
  }
  return params;
}

template <typename T>
void init_missing_parameters(ParameterSet<T>& params, const ModelConfig& config, const HeadSet& heads, Rng& rng) {
  for (const auto& [name, shape] : parameter_inventory(config, heads)) {
    if (!params.contains(name)) params.insert(name, init_tensor<T>(name, shape, rng));
  }
}

template <typename T>
void check_parameters(const ParameterSet<T>& params, const ModelConfig& config, const HeadSet& heads) {
  const auto inventory = parameter_inventory(config, heads);
  std::set<std::string, std::less<>> expected;
  for (const auto& [name, shape] : inventory) {
    expected.insert(name);
    if (!params.contains(name)) throw ModelError("missing parameter '" + name + "'");
    if (params.at(name).shape() != shape) {
      throw ModelError("parameter '" + name + "' has shape " + shape_to_string(params.at(name).shape()) +
                       ", config expects " + shape_to_string(shape));
    }
  }
  for (const auto& [name, t] : params) {
    if (!expected.count(name)) throw ModelError("unexpected parameter '" + name + "'");
  }
}

template ParameterSet<float> init_parameters<float>(const ModelConfig&, const HeadSet&, Rng&);
template ParameterSet<double> init_parameters<double>(const ModelConfig&, const HeadSet&, Rng&);
template void init_missing_parameters<float>(ParameterSet<float>&, const ModelConfig&, const HeadSet&, Rng&);
template void init_missing_parameters<double>(ParameterSet<double>&, const ModelConfig&, const HeadSet&, Rng&);
template void check_parameters<float>(const ParameterSet<float>&, const ModelConfig&, const HeadSet&);
template void check_parameters<double>(const ParameterSet<double>&, const ModelConfig&, const HeadSet&);

}  // namespace bioner::model

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/model/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace bioner::model {

namespace {

std::size_t parse_size(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ModelError("model config is missing '" + key + "'");
  std::size_t v = 0;
  const auto& s = it->second;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw ModelError("model config '" + key + "' is not an integer: " + s);
  return v;
}

double parse_real(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ModelError("model config is missing '" + key + "'");
  std::istringstream is(it->second);
  double v = 0;
  if (!(is >> v) || !is.eof()) throw ModelError("model config '" + key + "' is not a number: " + it->second);
  return v;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ModelConfig ModelConfig::base() { return ModelConfig{}; }

ModelConfig ModelConfig::large() {
  ModelConfig c;
  c.hidden_size = 1024;
  c.num_layers = 24;
  c.num_heads = 16;
  c.intermediate_size = 4096;
  return c;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ModelError("invalid model config: " + what); };
  if (vocab_size == 0 || embedding_size == 0 || hidden_size == 0 || num_heads == 0 || intermediate_size == 0 ||
      max_positions == 0) {
    fail("all sizes must be positive");
  }
  if (hidden_size % num_heads != 0) fail("hidden_size must be divisible by num_heads");
  if (embedding_size > hidden_size) fail("embedding_size must not exceed hidden_size");
  if (type_vocab_size != 2) fail("type_vocab_size must be 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (!(layer_norm_eps > 0.0)) fail("layer_norm_eps must be positive");
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {
      {"vocab_size", std::to_string(vocab_size)},
      {"embedding_size", std::to_string(embedding_size)},
      {"hidden_size", std::to_string(hidden_size)},
      {"num_layers", std::to_string(num_layers)},
      {"num_heads", std::to_string(num_heads)},
      {"intermediate_size", std::to_string(intermediate_size)},
      {"max_positions", std::to_string(max_positions)},
      {"type_vocab_size", std::to_string(type_vocab_size)},
      {"share_parameters", share_parameters ? "true" : "false"},
      {"dropout_rate", format_real(dropout_rate)},
      {"layer_norm_eps", format_real(layer_norm_eps)},
  };
}

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  c.vocab_size = parse_size(kv, "vocab_size");
  c.embedding_size = parse_size(kv, "embedding_size");
  c.hidden_size = parse_size(kv, "hidden_size");
  c.num_layers = parse_size(kv, "num_layers");
  c.num_heads = parse_size(kv, "num_heads");
  c.intermediate_size = parse_size(kv, "intermediate_size");
  c.max_positions = parse_size(kv, "max_positions");
  c.type_vocab_size = parse_size(kv, "type_vocab_size");
  auto share = kv.find("share_parameters");
  if (share == kv.end() || (share->second != "true" && share->second != "false")) {
    throw ModelError("model config 'share_parameters' must be true or false");
  }
  c.share_parameters = share->second == "true";
  c.dropout_rate = parse_real(kv, "dropout_rate");
  c.layer_norm_eps = parse_real(kv, "layer_norm_eps");
  c.validate();
  return c;
}

}  // namespace bioner::model

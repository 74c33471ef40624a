// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bioner::cli {

namespace {

KeySpec int_key(std::string name, std::string def, std::string help) {
  return {std::move(name), ValueType::kInt, std::move(def), {}, std::move(help)};
}
KeySpec real_key(std::string name, std::string def, std::string help) {
  return {std::move(name), ValueType::kReal, std::move(def), {}, std::move(help)};
}
KeySpec bool_key(std::string name, std::string def, std::string help) {
  return {std::move(name), ValueType::kBool, std::move(def), {}, std::move(help)};
}
KeySpec path_key(std::string name, std::string help) {
  return {std::move(name), ValueType::kPath, "", {}, std::move(help)};
}
KeySpec choice_key(std::string name, std::string def, std::vector<std::string> choices, std::string help) {
  return {std::move(name), ValueType::kChoice, std::move(def), std::move(choices), std::move(help)};
}

std::vector<KeySpec> common_keys() {
  return {int_key("seed", "12345", "seed for every random stream of the run"),
          int_key("threads", "1", "worker threads (compute currently runs on one)")};
}

std::vector<KeySpec> model_keys() {
  return {int_key("vocab_size", "30000", "vocabulary size; must equal the vocabulary in vocab_dir"),
          int_key("embedding_size", "128", "token embedding size E"),
          int_key("hidden_size", "768", "hidden size H"),
          int_key("num_layers", "12", "transformer layers L"),
          int_key("num_heads", "12", "attention heads A"),
          int_key("intermediate_size", "3072", "feed-forward size"),
          int_key("max_position", "512", "position embedding rows"),
          bool_key("share_layers", "true", "one block shared by all layers"),
          choice_key("activation", "gelu", {"gelu"}, "feed-forward activation"),
          real_key("dropout", "0", "dropout rate"),
          real_key("layer_norm_eps", "1e-12", "layer norm epsilon")};
}

std::vector<KeySpec> build_schema(std::string_view command) {
  std::vector<KeySpec> s = common_keys();
  auto add = [&s](std::vector<KeySpec> more) { s.insert(s.end(), more.begin(), more.end()); };
  if (command == "prep-corpus") {
    add({path_key("input", "raw text file, or directory whose files are documents (name order)")});
  } else if (command == "build-vocab") {
    add({path_key("corpus", "preprocessed corpus"), int_key("vocab_size", "30000", "target vocabulary size")});
  } else if (command == "pretrain") {
    add({path_key("corpus", "preprocessed corpus"), path_key("vocab_dir", "directory with vocab.txt and merges.txt"),
         path_key("example_cache", "example cache; read if present, else written")});
    add(model_keys());
    add({choice_key("precision", "32", {"32", "64"}, "floating-point width of training arithmetic"),
         choice_key("optimizer", "lamb", {"lamb", "adamw"}, "optimizer"),
         int_key("batch_size", "1024", "train batch size"),
         int_key("eval_batch_size", "16", "held-out batch size"),
         int_key("max_seq_length", "512", "tokens per example"),
         int_key("max_predictions", "20", "masked positions per example at most"),
         real_key("mask_rate", "0.15", "fraction of tokens masked"),
         int_key("dup_factor", "1", "passes over the corpus with fresh pairing and masking"),
         real_key("learning_rate", "0.00176", "peak learning rate"),
         int_key("train_steps", "200000", "optimizer steps"),
         int_key("warmup_steps", "3125", "linear warmup steps"),
         real_key("weight_decay", "0.01", "decoupled weight decay"),
         int_key("save_every", "1000", "checkpoint interval in steps"),
         int_key("eval_every", "1000", "held-out evaluation interval in steps"),
         real_key("held_out_fraction", "0", "trailing fraction of documents kept for evaluation"),
         bool_key("resume", "true", "continue from checkpoint.bin in the output directory"),
         int_key("stop_at_step", "0", "end the session after this step with a checkpoint (0 = run to train_steps)")});
  } else if (command == "finetune") {
    add({path_key("checkpoint", "pretrained checkpoint"), path_key("vocab_dir", "directory with vocab.txt and merges.txt"),
         path_key("train", "CoNLL training file"), path_key("dev", "CoNLL development file"),
         path_key("test", "CoNLL test file (optional)"),
         choice_key("precision", "32", {"32", "64"}, "floating-point width of training arithmetic"),
         choice_key("optimizer", "adamw", {"adamw"}, "optimizer"),
         int_key("batch_size", "32", "train batch size"),
         int_key("eval_batch_size", "16", "evaluation batch size"),
         int_key("max_seq_length", "512", "pieces per sentence including [CLS] and [SEP]"),
         real_key("learning_rate", "1e-5", "peak learning rate"),
         int_key("train_steps", "5336", "optimizer steps"),
         int_key("warmup_steps", "320", "linear warmup steps"),
         real_key("weight_decay", "0.01", "decoupled weight decay"),
         int_key("save_every", "200", "dev evaluation and best-checkpoint interval"),
         bool_key("lower_case", "true", "lowercase ASCII letters before tokenizing"),
         real_key("dropout", "0", "dropout rate during fine-tuning")});
  } else if (command == "evaluate") {
    add({path_key("gold", "gold CoNLL file"), path_key("pred", "predicted CoNLL file")});
  } else if (command == "predict") {
    add({path_key("checkpoint", "fine-tuned checkpoint"), path_key("vocab_dir", "directory with vocab.txt and merges.txt"),
         path_key("input", "CoNLL file; only the first column is read"),
         int_key("eval_batch_size", "16", "sentences per forward pass")});
  } else if (command == "stats") {
    add({path_key("input", "CoNLL file or preprocessed corpus"),
         choice_key("format", "conll", {"conll", "corpus"}, "input kind")});
  } else {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
  return s;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<std::uint64_t> parse_int(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<double> parse_real(std::string_view v) {
  if (v.empty()) return std::nullopt;
  const std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(d)) return std::nullopt;
  return d;
}

std::string describe(const KeySpec& spec) {
  switch (spec.type) {
    case ValueType::kInt: return "a non-negative integer";
    case ValueType::kReal: return "a finite real number";
    case ValueType::kBool: return "true or false";
    case ValueType::kChoice: {
      std::string out = "one of";
      for (const auto& c : spec.choices) out += " " + c;
      return out;
    }
    default: return "a single-line string";
  }
}

bool valid(const KeySpec& spec, std::string_view v) {
  switch (spec.type) {
    case ValueType::kInt: return parse_int(v).has_value();
    case ValueType::kReal: return parse_real(v).has_value();
    case ValueType::kBool: return v == "true" || v == "false";
    case ValueType::kChoice: return std::find(spec.choices.begin(), spec.choices.end(), v) != spec.choices.end();
    default: return v.find('\n') == std::string_view::npos;
  }
}

}  // namespace

const std::vector<KeySpec>& schema_for(std::string_view command) {
  static const std::map<std::string, std::vector<KeySpec>, std::less<>> schemas = [] {
    std::map<std::string, std::vector<KeySpec>, std::less<>> m;
    for (const auto& c : kCommands) m.emplace(c, build_schema(c));
    return m;
  }();
  const auto it = schemas.find(command);
  if (it == schemas.end()) throw ConfigError("unknown command '" + std::string(command) + "'");
  return it->second;
}

RunConfig::RunConfig(std::vector<KeySpec> schema) : schema_(std::move(schema)) {
  for (const auto& k : schema_) values_[k.name] = k.default_value;
}

const KeySpec& RunConfig::spec(std::string_view key, std::string_view where) const {
  for (const auto& k : schema_) {
    if (k.name == key) return k;
  }
  throw ConfigError(std::string(where) + ": unknown key '" + std::string(key) + "'");
}

void RunConfig::set(std::string_view key, std::string_view value, std::string_view where) {
  const KeySpec& k = spec(key, where);
  if (!valid(k, value)) {
    throw ConfigError(std::string(where) + ": key '" + k.name + "' expects " + describe(k) + ", got '" +
                      std::string(value) + "'");
  }
  values_[k.name] = std::string(value);
}

void RunConfig::apply_text(std::string_view text, std::string_view source) {
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value, got '" + std::string(line) + "'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_text(ss.str(), path.string());
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("command line: expected key=value, got '" + std::string(assignment) + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "command line");
}

const std::string& RunConfig::raw(std::string_view key) const {
  spec(key, "lookup");
  return values_.find(key)->second;
}

std::uint64_t RunConfig::get_int(std::string_view key) const { return *parse_int(raw(key)); }
double RunConfig::get_real(std::string_view key) const { return *parse_real(raw(key)); }
bool RunConfig::get_bool(std::string_view key) const { return raw(key) == "true"; }
const std::string& RunConfig::get_string(std::string_view key) const { return raw(key); }

std::filesystem::path RunConfig::get_path(std::string_view key) const {
  const auto p = get_optional_path(key);
  if (!p) throw ConfigError("key '" + std::string(key) + "' is required");
  return *p;
}

std::optional<std::filesystem::path> RunConfig::get_optional_path(std::string_view key) const {
  const std::string& v = raw(key);
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

std::string RunConfig::effective() const {
  std::string out;
  for (const auto& k : schema_) out += k.name + "=" + values_.find(k.name)->second + "\n";
  return out;
}

RunConfig parse_config(std::string_view command, const std::optional<std::filesystem::path>& file,
                       std::span<const std::string> overrides) {
  RunConfig config(schema_for(command));
  if (file) config.apply_file(*file);
  for (const auto& o : overrides) config.apply_override(o);
  return config;
}

}  // namespace bioner::cli

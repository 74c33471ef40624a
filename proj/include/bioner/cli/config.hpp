// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Flat key=value run configuration with a typed schema per command.
// Sources apply in order defaults < config file < command line.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bioner::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { kInt, kReal, kBool, kString, kPath, kChoice };

struct KeySpec {
  std::string name;
  ValueType type = ValueType::kString;
  std::string default_value;        // empty path/string = unset
  std::vector<std::string> choices;  // kChoice only
  std::string help;
};

inline const std::vector<std::string> kCommands = {"prep-corpus", "build-vocab", "pretrain", "finetune",
                                                   "evaluate",    "predict",     "stats"};

/// Keys accepted by `command`, in echo order. Throws ConfigError for an
/// unknown command.
const std::vector<KeySpec>& schema_for(std::string_view command);

class RunConfig {
 public:
  explicit RunConfig(std::vector<KeySpec> schema);

  /// "key = value" lines; '#' starts a comment, blank lines are ignored.
  /// Errors name the source, line, and key.
  void apply_text(std::string_view text, std::string_view source);
  void apply_file(const std::filesystem::path& path);
  /// One "key=value" from the command line.
  void apply_override(std::string_view assignment);
  void set(std::string_view key, std::string_view value, std::string_view where);

  const std::string& raw(std::string_view key) const;
  std::uint64_t get_int(std::string_view key) const;
  double get_real(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  const std::string& get_string(std::string_view key) const;
  /// Throws ConfigError naming the key when it is unset.
  std::filesystem::path get_path(std::string_view key) const;
  std::optional<std::filesystem::path> get_optional_path(std::string_view key) const;

  /// Every key in schema order as "key=value" lines.
  std::string effective() const;

 private:
  const KeySpec& spec(std::string_view key, std::string_view where) const;

  std::vector<KeySpec> schema_;
  std::map<std::string, std::string, std::less<>> values_;
};

/// Defaults for `command`, then `file` (if any), then `overrides`.
RunConfig parse_config(std::string_view command, const std::optional<std::filesystem::path>& file,
                       std::span<const std::string> overrides);

}  // namespace bioner::cli

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint file layout (all integers little-endian u32, values f32):
//
//   "ABCK0001"
//   header_length, header bytes   key=value lines: model.*, heads.*, and
//                                 free-form metadata
//   tensor_count
//   per tensor: name_length, name, rank, dims[rank], values[prod(dims)]
//
// Model tensors use their parameter names; optimizer state is stored
// under the "optim/" prefix.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bioner/model/config.hpp"
#include "bioner/model/parameters.hpp"

namespace bioner::model {

class CheckpointCorrupt : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kCheckpointMagic = "ABCK0001";
inline constexpr std::string_view kOptimizerPrefix = "optim/";

template <typename T>
struct Checkpoint {
  ModelConfig config;
  HeadSet heads;
  ParameterSet<T> params;
  ParameterSet<T> optimizer;  // names without the "optim/" prefix
  std::map<std::string, std::string> metadata;
};

/// Writes to a sibling temporary file and renames it into place, so the
/// target is either the old file or the complete new one.
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt);

/// Throws CheckpointCorrupt on a bad magic, malformed header, or truncated
/// file; ConfigMismatch when the stored tensors disagree with the stored
/// config, or with `expected` when given.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path,
                              const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace bioner::model

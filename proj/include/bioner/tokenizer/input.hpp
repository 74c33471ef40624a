// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bioner/tokenizer/vocab.hpp"

namespace bioner::tokenizer {

/// One model input row, always padded to the configured length.
struct InputSequence {
  std::vector<std::int32_t> token_ids;
  std::vector<std::int32_t> type_ids;
  std::vector<std::int32_t> attention_mask;

  std::size_t length() const { return token_ids.size(); }
  bool operator==(const InputSequence&) const = default;
};

/// Lays out [CLS] A [SEP] (B [SEP]) and pads with [PAD] to max_len. When
/// the pair does not fit, the longer segment loses its last token until it
/// does (B on ties). Throws VocabError when max_len cannot hold the special
/// tokens plus one token per non-empty segment.
InputSequence build_input_pair(std::span<const std::int32_t> seg_a, std::span<const std::int32_t> seg_b,
                               std::size_t max_len);

}  // namespace bioner::tokenizer

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/tokenizer/input.hpp"

#include <string>

namespace bioner::tokenizer {

InputSequence build_input_pair(std::span<const std::int32_t> seg_a, std::span<const std::int32_t> seg_b,
                               std::size_t max_len) {
  const bool pair = !seg_b.empty();
  const std::size_t specials = pair ? 3 : 2;
  const std::size_t minimum = pair ? specials + 2 : 3;
  if (max_len < minimum) {
    throw VocabError("max_len " + std::to_string(max_len) + " cannot hold the special tokens (need at least " +
                     std::to_string(minimum) + ")");
  }

  std::size_t len_a = seg_a.size();
  std::size_t len_b = seg_b.size();
  while (len_a + len_b + specials > max_len) {
    if (len_a > len_b) {
      --len_a;
    } else {
      --len_b;
    }
  }

  InputSequence seq;
  seq.token_ids.reserve(max_len);
  seq.token_ids.push_back(kClsId);
  seq.token_ids.insert(seq.token_ids.end(), seg_a.begin(), seg_a.begin() + static_cast<std::ptrdiff_t>(len_a));
  seq.token_ids.push_back(kSepId);
  seq.type_ids.assign(seq.token_ids.size(), 0);
  if (pair) {
    seq.token_ids.insert(seq.token_ids.end(), seg_b.begin(), seg_b.begin() + static_cast<std::ptrdiff_t>(len_b));
    seq.token_ids.push_back(kSepId);
    seq.type_ids.resize(seq.token_ids.size(), 1);
  }
  seq.attention_mask.assign(seq.token_ids.size(), 1);
  seq.token_ids.resize(max_len, kPadId);
  seq.type_ids.resize(max_len, 0);
  seq.attention_mask.resize(max_len, 0);
  return seq;
}

}  // namespace bioner::tokenizer

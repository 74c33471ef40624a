// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bioner/ner/conll.hpp"
#include "bioner/tokenizer/input.hpp"
#include "bioner/tokenizer/vocab.hpp"

namespace bioner::ner {

/// A sentence laid out as [CLS] pieces... [SEP] [PAD]... with one label per
/// position. Only the first piece of each kept word carries a label id;
/// every other position holds ops::kIgnoreIndex.
struct AlignedExample {
  tokenizer::InputSequence input;
  std::vector<std::int32_t> labels;
  /// Position of each kept word's first piece; size() == kept word count.
  std::vector<std::size_t> word_positions;
};

/// ASCII-only lowercasing; other bytes pass through unchanged.
std::string ascii_lower(std::string word);

/// An example with no labels (prediction input) gets kIgnoreIndex
/// everywhere. Throws ConllError for an empty example, a label outside `labels`, or a
/// first word whose pieces alone exceed max_len - 2. Words that do not fit
/// are dropped whole from the tail.
AlignedExample align_subwords(const NerExample& example, const tokenizer::Vocab& vocab, const LabelSet& labels,
                              std::size_t max_len, bool lower_case = false);

}  // namespace bioner::ner

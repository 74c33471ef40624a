// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/ner/align.hpp"

#include "bioner/numerics/ops.hpp"

namespace bioner::ner {

std::string ascii_lower(std::string word) {
  for (char& c : word) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return word;
}

AlignedExample align_subwords(const NerExample& example, const tokenizer::Vocab& vocab, const LabelSet& labels,
                              std::size_t max_len, bool lower_case) {
  if (example.words.empty()) throw ConllError("cannot align an empty sentence");
  const bool labelled = !example.labels.empty();
  if (labelled && example.words.size() != example.labels.size()) {
    throw ConllError("sentence has mismatched word/label counts");
  }
  if (max_len < 3) throw ConllError("max_len must leave room for [CLS], [SEP] and one piece");
  const std::size_t budget = max_len - 2;

  AlignedExample out;
  auto& in = out.input;
  in.token_ids.push_back(tokenizer::kClsId);
  out.labels.push_back(ops::kIgnoreIndex);
  for (std::size_t w = 0; w < example.words.size(); ++w) {
    auto pieces = vocab.encode(lower_case ? ascii_lower(example.words[w]) : example.words[w]);
    if (pieces.empty()) pieces.push_back(tokenizer::kUnkId);
    if (in.token_ids.size() - 1 + pieces.size() > budget) {
      if (w == 0) {
        throw ConllError("word '" + example.words[0] + "' needs " + std::to_string(pieces.size()) +
                         " pieces, more than max_len - 2 = " + std::to_string(budget));
      }
      break;
    }
    std::int32_t id = ops::kIgnoreIndex;
    if (labelled) {
      const auto found = labels.id(example.labels[w]);
      if (!found) throw ConllError("label '" + example.labels[w] + "' is not in the label set");
      id = *found;
    }
    out.word_positions.push_back(in.token_ids.size());
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      in.token_ids.push_back(pieces[p]);
      out.labels.push_back(p == 0 ? id : ops::kIgnoreIndex);
    }
  }
  in.token_ids.push_back(tokenizer::kSepId);
  out.labels.push_back(ops::kIgnoreIndex);
  in.attention_mask.assign(in.token_ids.size(), 1);
  in.token_ids.resize(max_len, tokenizer::kPadId);
  in.attention_mask.resize(max_len, 0);
  in.type_ids.assign(max_len, 0);
  out.labels.resize(max_len, ops::kIgnoreIndex);
  return out;
}

}  // namespace bioner::ner

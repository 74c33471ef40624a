// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic corpora with known structure for the training sanity checks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bioner/model/config.hpp"
#include "bioner/ner/conll.hpp"
#include "bioner/tokenizer/vocab.hpp"

namespace bioner::testing {

/// V=100, E=8, H=16, A=2, L=3, I=64, P=32, shared.
model::ModelConfig tiny_config();

/// Band corpus: sentence k of every document draws its words from band k
/// only, Zipf-distributed inside the band with a band-specific rank order.
/// Swapping two adjacent sentences therefore shows in which bands the two
/// segments use, and each word is predictable from the band of its
/// neighbours.
struct BandCorpus {
  std::size_t vocab_size = 200;  // including the five specials
  std::size_t bands = 5;         // also sentences per document
  std::size_t min_words = 8;
  std::size_t max_words = 12;
  double zipf_exponent = 1.3;
  /// Fixes the per-band rank order, so corpora drawn with different
  /// sampling seeds share one distribution.
  std::uint64_t layout_seed = 7;

  std::vector<std::string> words() const;
  tokenizer::Vocab vocab() const;
  /// Corpus-format text (one sentence per line, blank line between documents).
  std::string text(std::size_t documents, std::uint64_t seed) const;
};

/// Gazetteer tagging task. Entities are exactly the gazetteer entries:
/// 10 single-word chemicals, 10 single-word diseases and 5 fixed two-word
/// entries of each type. Every other word is filler, and a filler follows
/// each entity. With TwoWord::kFixedEntries every label is determined by
/// the word itself. With TwoWord::kAnyPair a two-word entity is instead
/// any two single-word entries of one type, so telling B from I needs the
/// left neighbour.
struct Gazetteer {
  enum class TwoWord { kFixedEntries, kAnyPair };
  using Phrase = std::pair<std::string, std::string>;

  static const std::vector<std::string>& chemicals();
  static const std::vector<std::string>& diseases();
  static const std::vector<Phrase>& chemical_phrases();
  static const std::vector<Phrase>& disease_phrases();
  static const std::vector<std::string>& fillers();
  /// Every distinct word above, for word-level vocabularies.
  static std::vector<std::string> words();

  static std::vector<ner::NerExample> sentences(std::size_t count, std::uint64_t seed,
                                                TwoWord mode = TwoWord::kFixedEntries);
  /// The same sentences as corpus-format text for pretraining and vocabulary training.
  static std::string corpus_text(std::size_t documents, std::size_t sentences_per_document, std::uint64_t seed,
                                 TwoWord mode = TwoWord::kFixedEntries);
};

}  // namespace bioner::testing

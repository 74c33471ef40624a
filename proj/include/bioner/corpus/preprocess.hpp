// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bioner::corpus {

class PreprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lines shorter than this many Unicode scalar values (after trailing
/// whitespace is trimmed) are dropped.
inline constexpr std::size_t kMinSentenceChars = 20;

struct RawDocument {
  std::string name;
  std::string text;
};

struct Document {
  std::vector<std::string> sentences;
};

/// Offset of the first byte that is not part of a well-formed UTF-8
/// sequence, or nullopt if the whole input is valid.
std::optional<std::size_t> find_invalid_utf8(std::string_view text);

/// Number of Unicode scalar values; input must be valid UTF-8.
std::size_t count_scalar_values(std::string_view text);

/// Converts raw documents to the sentence-per-line corpus format: blank
/// lines are removed, lines with fewer than kMinSentenceChars characters
/// are removed, trailing whitespace is trimmed, and consecutive documents
/// are separated by exactly one blank line. Documents with no surviving
/// line are omitted. Throws PreprocessError naming the document and byte
/// offset of the first malformed UTF-8 sequence.
std::string preprocess_raw(std::span<const RawDocument> documents);

/// Splits corpus text into documents at blank lines.
std::vector<Document> parse_corpus(std::string_view corpus);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t words = 0;

  CorpusStats& operator+=(const CorpusStats& o) {
    documents += o.documents;
    sentences += o.sentences;
    words += o.words;
    return *this;
  }
  bool operator==(const CorpusStats&) const = default;
};

/// Words are whitespace-separated tokens.
CorpusStats corpus_stats(std::string_view corpus);

}  // namespace bioner::corpus

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bioner::ner {

class ConllError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One sentence: words x1..xz with one BIO label each.
struct NerExample {
  std::vector<std::string> words;
  std::vector<std::string> labels;

  bool operator==(const NerExample&) const = default;
};

enum class Tag { kOutside, kBegin, kInside };

struct ParsedLabel {
  Tag tag = Tag::kOutside;
  std::string type;  // empty for untyped B/I
};

/// Accepts "O", "B", "I", "B-<type>", "I-<type>".
std::optional<ParsedLabel> parse_label(std::string_view label);

/// "O" first, then for each entity type in lexicographic order its B label
/// followed by its I label (when present).
class LabelSet {
 public:
  LabelSet() = default;
  /// Throws ConllError if "O" is missing, a label is not BIO-shaped, or an
  /// I-t label has no matching B-t.
  explicit LabelSet(std::span<const std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t id) const { return labels_.at(id); }
  std::optional<std::int32_t> id(std::string_view label) const;
  std::int32_t outside_id() const { return 0; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(std::string_view label) const { return id(label).has_value(); }

  /// Comma-joined list, as stored in fine-tuned checkpoints.
  std::string serialize() const;
  static LabelSet deserialize(std::string_view text);

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

struct ConllData {
  std::vector<NerExample> examples;
  LabelSet labels;
};

/// Columns are whitespace-separated; the first is the word and the last the
/// label. A blank line ends a sentence and "-DOCSTART-" lines are skipped.
/// Errors carry "<source>:<line>".
ConllData parse_conll(std::string_view text, std::string_view source = "<input>");
ConllData read_conll(const std::filesystem::path& path);

/// Words only (first column; any other columns ignored), for tagging
/// unlabelled text. Labels of the returned examples are empty.
std::vector<NerExample> parse_conll_words(std::string_view text);
std::vector<NerExample> read_conll_words(const std::filesystem::path& path);

/// Writes words and labels as "word<TAB>label" lines with blank-line
/// sentence separators.
std::string format_conll(std::span<const NerExample> examples);

struct DatasetStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t annotations = 0;

  bool operator==(const DatasetStats&) const = default;
};

/// Annotations are the decoded gold entity spans.
DatasetStats dataset_stats(std::span<const NerExample> examples);
DatasetStats dataset_stats(const std::filesystem::path& path);

}  // namespace bioner::ner

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bioner::tokenizer {

class VocabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr std::int32_t kClsId = 2;
inline constexpr std::int32_t kSepId = 3;
inline constexpr std::int32_t kMaskId = 4;
inline constexpr std::int32_t kNumSpecials = 5;
/// Five specials followed by the 256 single-byte pieces.
inline constexpr std::int32_t kByteLevelBaseSize = kNumSpecials + 256;

inline constexpr std::array<std::string_view, kNumSpecials> kSpecialNames = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                                                            "[MASK]"};

struct Merge {
  std::int32_t left;
  std::int32_t right;
  std::int32_t result;
};

/// Subword vocabulary. Ids are dense in [0, size()); the five specials
/// occupy ids 0..4.
///
/// A byte-level vocabulary holds every single-byte piece and encodes by
/// replaying its merge list (lossless). A word-level vocabulary (built with
/// from_words) maps whitespace-separated words to ids and everything else
/// to [UNK]; it exists for synthetic corpora with a fixed small alphabet.
class Vocab {
 public:
  static Vocab byte_level();
  static Vocab from_words(const std::vector<std::string>& words);

  std::int32_t size() const { return static_cast<std::int32_t>(pieces_.size()); }
  bool byte_level_encoding() const { return byte_level_; }

  const std::string& piece(std::int32_t id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  std::optional<std::int32_t> find(std::string_view piece) const;
  static bool is_special(std::int32_t id) { return id >= 0 && id < kNumSpecials; }

  std::span<const Merge> merges() const { return merges_; }

  /// Records a merge of two existing pieces. The concatenated piece reuses
  /// an existing id when one exists, otherwise it is appended.
  const Merge& add_merge(std::int32_t left, std::int32_t right);

  /// No special tokens are inserted.
  std::vector<std::int32_t> encode(std::string_view text) const;

  /// Special ids are skipped.
  std::string decode(std::span<const std::int32_t> ids) const;

  /// Vocab file: "piece<TAB>id" per line, specials first. Merge file:
  /// "left<TAB>right" per line in merge order. Pieces are escaped (see
  /// escape_piece) so both files are plain ASCII.
  void save(const std::filesystem::path& vocab_file, const std::filesystem::path& merges_file) const;
  static Vocab load(const std::filesystem::path& vocab_file, const std::filesystem::path& merges_file);

  bool operator==(const Vocab& other) const;

 private:
  Vocab() = default;
  std::int32_t add_piece(std::string piece);
  std::vector<std::int32_t> encode_chunk(std::string_view chunk) const;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::int32_t> regular_ids_;
  std::vector<Merge> merges_;
  std::map<std::pair<std::int32_t, std::int32_t>, std::pair<std::size_t, std::int32_t>> merge_rank_;
  bool byte_level_ = false;
};

/// Byte-pair vocabulary training. Text is split into maximal runs of
/// whitespace and non-whitespace bytes; pairs never cross a run boundary.
/// Each round merges the most frequent adjacent pair (ties broken by the
/// lexicographically smallest (left, right) piece pair) until the
/// vocabulary reaches target_size or no pair occurs twice.
Vocab train_vocab(std::string_view corpus, std::size_t target_size);

/// Splits text into the maximal whitespace / non-whitespace runs used by
/// both training and encoding.
std::vector<std::string_view> split_runs(std::string_view text);

/// Printable ASCII except '\\', '[' and space is written as-is; every other
/// byte becomes \xHH. Special pieces are written verbatim.
std::string escape_piece(std::string_view piece);
std::string unescape_piece(std::string_view text);

}  // namespace bioner::tokenizer

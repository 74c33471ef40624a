// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

// Pretraining example construction: sentence-order pairs and masked-LM
// corruption, plus the binary example cache.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bioner/corpus/preprocess.hpp"
#include "bioner/numerics/rng.hpp"
#include "bioner/tokenizer/input.hpp"
#include "bioner/tokenizer/vocab.hpp"

namespace bioner::corpus {

enum class SopLabel : std::int32_t { kInOrder = 0, kSwapped = 1 };

using Segment = std::vector<std::int32_t>;
/// A document as one token sequence per sentence.
using TokenizedDocument = std::vector<Segment>;

struct SegmentPair {
  Segment first;
  Segment second;
  SopLabel label;
};

std::vector<TokenizedDocument> tokenize_documents(std::span<const Document> docs, const tokenizer::Vocab& vocab);

/// Walks every adjacent sentence pair of every document with at least two
/// sentences; `keep_order()` decides per pair whether it is emitted in
/// corpus order or swapped. The whole walk is repeated dup_factor times.
std::vector<SegmentPair> make_sop_pairs(std::span<const TokenizedDocument> docs, std::size_t dup_factor,
                                        const std::function<bool()>& keep_order);

/// Same, with a fair coin drawn from `rng` for every pair.
std::vector<SegmentPair> make_sop_pairs(std::span<const TokenizedDocument> docs, Rng& rng, std::size_t dup_factor);

enum class MaskBranch { kMask, kRandom, kKeep };

struct MlmMask {
  std::vector<std::int32_t> positions;  // strictly increasing
  std::vector<std::int32_t> labels;     // original ids at `positions`
  std::vector<MaskBranch> branches;
};

inline constexpr double kDefaultMaskRate = 0.15;
inline constexpr std::size_t kDefaultMaxPredictions = 20;

/// Selects min(max_predictions, max(1, floor(mask_rate * candidates)))
/// non-special positions uniformly without replacement and corrupts them in
/// place: [MASK] with probability 0.8, a uniform non-special id with 0.1,
/// unchanged with 0.1. `forced_branch` overrides the branch draw (the draw
/// is still consumed). Throws std::invalid_argument when there are no
/// candidates or mask_rate is outside (0, 1).
MlmMask apply_mlm_mask(tokenizer::InputSequence& seq, const tokenizer::Vocab& vocab, Rng& rng, double mask_rate,
                       std::size_t max_predictions, std::optional<MaskBranch> forced_branch = std::nullopt);

struct PretrainExample {
  tokenizer::InputSequence input;
  std::vector<std::int32_t> mlm_positions;
  std::vector<std::int32_t> mlm_labels;
  SopLabel sop_label = SopLabel::kInOrder;

  bool operator==(const PretrainExample&) const = default;
};

struct ExampleOptions {
  std::size_t max_seq_length = 512;
  std::size_t max_predictions = kDefaultMaxPredictions;
  double mask_rate = kDefaultMaskRate;
  std::size_t dup_factor = 1;
};

/// Pairs, lays out, and masks every example with one sequential stream.
std::vector<PretrainExample> build_pretraining_examples(std::span<const TokenizedDocument> docs,
                                                        const tokenizer::Vocab& vocab, Rng& rng,
                                                        const ExampleOptions& options);

class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-byte magic: 'A' 'B' 'P' 'T' 0x00 '0' '0' '1'.
inline constexpr std::string_view kExampleCacheMagic{"ABPT\0" "001", 8};

/// Magic, then per example a u32 payload byte length followed by
/// little-endian i32 fields: T, token_ids[T], type_ids[T],
/// attention_mask[T], n, mlm_positions[n], mlm_labels[n], sop_label.
void write_example_cache(const std::filesystem::path& path, std::span<const PretrainExample> examples);
std::vector<PretrainExample> read_example_cache(const std::filesystem::path& path);

}  // namespace bioner::corpus

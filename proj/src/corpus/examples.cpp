// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/corpus/examples.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "bioner/io/binary.hpp"

namespace bioner::corpus {

using tokenizer::InputSequence;
using tokenizer::Vocab;

std::vector<TokenizedDocument> tokenize_documents(std::span<const Document> docs, const Vocab& vocab) {
  std::vector<TokenizedDocument> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    TokenizedDocument tokens;
    tokens.reserve(doc.sentences.size());
    for (const auto& s : doc.sentences) tokens.push_back(vocab.encode(s));
    out.push_back(std::move(tokens));
  }
  return out;
}

std::vector<SegmentPair> make_sop_pairs(std::span<const TokenizedDocument> docs, std::size_t dup_factor,
                                        const std::function<bool()>& keep_order) {
  if (dup_factor == 0) throw std::invalid_argument("dup_factor must be at least 1");
  std::vector<SegmentPair> pairs;
  for (std::size_t dup = 0; dup < dup_factor; ++dup) {
    for (const TokenizedDocument& doc : docs) {
      if (doc.size() < 2) continue;
      for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
        if (keep_order()) {
          pairs.push_back({doc[i], doc[i + 1], SopLabel::kInOrder});
        } else {
          pairs.push_back({doc[i + 1], doc[i], SopLabel::kSwapped});
        }
      }
    }
  }
  return pairs;
}

std::vector<SegmentPair> make_sop_pairs(std::span<const TokenizedDocument> docs, Rng& rng, std::size_t dup_factor) {
  return make_sop_pairs(docs, dup_factor, [&rng] { return rng.bernoulli(0.5); });
}

MlmMask apply_mlm_mask(InputSequence& seq, const Vocab& vocab, Rng& rng, double mask_rate,
                       std::size_t max_predictions, std::optional<MaskBranch> forced_branch) {
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw std::invalid_argument("mask_rate must lie in (0, 1)");
  if (vocab.size() <= tokenizer::kNumSpecials) throw std::invalid_argument("vocabulary has no regular pieces");

  std::vector<std::int32_t> candidates;
  for (std::size_t i = 0; i < seq.token_ids.size(); ++i) {
    if (!Vocab::is_special(seq.token_ids[i])) candidates.push_back(static_cast<std::int32_t>(i));
  }
  if (candidates.empty()) throw std::invalid_argument("no maskable positions in sequence");

  const auto by_rate = static_cast<std::size_t>(std::floor(mask_rate * static_cast<double>(candidates.size())));
  const std::size_t num_predict = std::min(max_predictions, std::max<std::size_t>(1, by_rate));

  MlmMask mask;
  for (std::size_t pick : rng.sample_without_replacement(candidates.size(), num_predict)) {
    mask.positions.push_back(candidates[pick]);
  }
  std::sort(mask.positions.begin(), mask.positions.end());

  const auto regular = static_cast<std::uint64_t>(vocab.size() - tokenizer::kNumSpecials);
  for (std::int32_t pos : mask.positions) {
    auto& token = seq.token_ids[static_cast<std::size_t>(pos)];
    mask.labels.push_back(token);
    const double u = rng.uniform();
    MaskBranch branch = u < 0.8 ? MaskBranch::kMask : (u < 0.9 ? MaskBranch::kRandom : MaskBranch::kKeep);
    if (forced_branch) branch = *forced_branch;
    switch (branch) {
      case MaskBranch::kMask:
        token = tokenizer::kMaskId;
        break;
      case MaskBranch::kRandom:
        token = tokenizer::kNumSpecials + static_cast<std::int32_t>(rng.uniform_int(regular));
        break;
      case MaskBranch::kKeep:
        break;
    }
    mask.branches.push_back(branch);
  }
  return mask;
}

std::vector<PretrainExample> build_pretraining_examples(std::span<const TokenizedDocument> docs, const Vocab& vocab,
                                                        Rng& rng, const ExampleOptions& options) {
  std::vector<PretrainExample> examples;
  for (const SegmentPair& pair : make_sop_pairs(docs, rng, options.dup_factor)) {
    PretrainExample ex;
    ex.input = tokenizer::build_input_pair(pair.first, pair.second, options.max_seq_length);
    MlmMask mask = apply_mlm_mask(ex.input, vocab, rng, options.mask_rate, options.max_predictions);
    ex.mlm_positions = std::move(mask.positions);
    ex.mlm_labels = std::move(mask.labels);
    ex.sop_label = pair.label;
    examples.push_back(std::move(ex));
  }
  return examples;
}

namespace {

void put(std::string& buf, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int s = 0; s < 32; s += 8) buf.push_back(static_cast<char>((u >> s) & 0xff));
}

void put_all(std::string& buf, const std::vector<std::int32_t>& vs) {
  for (auto v : vs) put(buf, v);
}

class PayloadReader {
 public:
  explicit PayloadReader(std::string_view bytes) : bytes_(bytes) {}

  std::int32_t next() {
    if (offset_ + 4 > bytes_.size()) throw CacheError("example record shorter than its fields");
    std::uint32_t u = 0;
    for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[offset_ + k])) << (8 * k);
    offset_ += 4;
    return static_cast<std::int32_t>(u);
  }

  std::vector<std::int32_t> take(std::int32_t n) {
    if (n < 0) throw CacheError("negative field length in example record");
    std::vector<std::int32_t> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = next();
    return out;
  }

  bool done() const { return offset_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t offset_ = 0;
};

}  // namespace

void write_example_cache(const std::filesystem::path& path, std::span<const PretrainExample> examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CacheError("cannot write " + path.string());
  out.write(kExampleCacheMagic.data(), static_cast<std::streamsize>(kExampleCacheMagic.size()));
  std::string payload;
  for (const PretrainExample& ex : examples) {
    payload.clear();
    put(payload, static_cast<std::int32_t>(ex.input.length()));
    put_all(payload, ex.input.token_ids);
    put_all(payload, ex.input.type_ids);
    put_all(payload, ex.input.attention_mask);
    put(payload, static_cast<std::int32_t>(ex.mlm_positions.size()));
    put_all(payload, ex.mlm_positions);
    put_all(payload, ex.mlm_labels);
    put(payload, static_cast<std::int32_t>(ex.sop_label));
    io::write_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  if (!out) throw CacheError("failed writing " + path.string());
}

std::vector<PretrainExample> read_example_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot open " + path.string());
  std::string magic(kExampleCacheMagic.size(), '\0');
  if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) || magic != kExampleCacheMagic) {
    throw CacheError(path.string() + ": not a pretraining example cache");
  }
  std::vector<PretrainExample> examples;
  std::uint32_t length = 0;
  while (io::read_u32(in, length)) {
    std::string payload;
    try {
      payload = io::expect_bytes(in, length, "example record");
    } catch (const io::TruncatedInput& e) {
      throw CacheError(path.string() + ": " + e.what());
    }
    PayloadReader r(payload);
    PretrainExample ex;
    const std::int32_t t = r.next();
    ex.input.token_ids = r.take(t);
    ex.input.type_ids = r.take(t);
    ex.input.attention_mask = r.take(t);
    const std::int32_t n = r.next();
    ex.mlm_positions = r.take(n);
    ex.mlm_labels = r.take(n);
    const std::int32_t sop = r.next();
    if (sop != 0 && sop != 1) throw CacheError(path.string() + ": bad sentence-order label");
    ex.sop_label = static_cast<SopLabel>(sop);
    if (!r.done()) throw CacheError(path.string() + ": trailing bytes in example record");
    examples.push_back(std::move(ex));
  }
  if (!in.eof() || in.gcount() != 0) throw CacheError(path.string() + ": truncated record length");
  return examples;
}

}  // namespace bioner::corpus

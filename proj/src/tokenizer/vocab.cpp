// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/tokenizer/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bioner::tokenizer {

namespace {

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VocabError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::vector<std::string_view> split_runs(std::string_view text) {
  std::vector<std::string_view> runs;
  std::size_t start = 0;
  while (start < text.size()) {
    const bool space = is_space_byte(static_cast<unsigned char>(text[start]));
    std::size_t end = start + 1;
    while (end < text.size() && is_space_byte(static_cast<unsigned char>(text[end])) == space) ++end;
    runs.push_back(text.substr(start, end - start));
    start = end;
  }
  return runs;
}

std::string escape_piece(std::string_view piece) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : piece) {
    if (c > 0x20 && c < 0x7f && c != '\\' && c != '[') {
      out.push_back(static_cast<char>(c));
    } else {
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

std::string unescape_piece(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 3 >= text.size() || text[i + 1] != 'x') throw VocabError("bad escape in piece '" + std::string(text) + "'");
    const int hi = hex_value(text[i + 2]);
    const int lo = hex_value(text[i + 3]);
    if (hi < 0 || lo < 0) throw VocabError("bad escape in piece '" + std::string(text) + "'");
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 3;
  }
  return out;
}

Vocab Vocab::byte_level() {
  Vocab v;
  for (auto name : kSpecialNames) v.pieces_.emplace_back(name);
  for (int b = 0; b < 256; ++b) v.add_piece(std::string(1, static_cast<char>(b)));
  v.byte_level_ = true;
  return v;
}

Vocab Vocab::from_words(const std::vector<std::string>& words) {
  Vocab v;
  for (auto name : kSpecialNames) v.pieces_.emplace_back(name);
  for (const auto& w : words) {
    if (w.empty()) throw VocabError("empty word in word-level vocabulary");
    if (std::any_of(w.begin(), w.end(), [](char c) { return is_space_byte(static_cast<unsigned char>(c)); })) {
      throw VocabError("word-level piece contains whitespace: '" + w + "'");
    }
    if (v.regular_ids_.count(w)) throw VocabError("duplicate piece '" + w + "'");
    v.add_piece(w);
  }
  return v;
}

std::int32_t Vocab::add_piece(std::string piece) {
  const auto id = static_cast<std::int32_t>(pieces_.size());
  regular_ids_.emplace(piece, id);
  pieces_.push_back(std::move(piece));
  return id;
}

std::optional<std::int32_t> Vocab::find(std::string_view piece) const {
  for (std::int32_t i = 0; i < kNumSpecials; ++i) {
    if (kSpecialNames[static_cast<std::size_t>(i)] == piece) return i;
  }
  auto it = regular_ids_.find(std::string(piece));
  if (it == regular_ids_.end()) return std::nullopt;
  return it->second;
}

const Merge& Vocab::add_merge(std::int32_t left, std::int32_t right) {
  if (!byte_level_) throw VocabError("merges require a byte-level vocabulary");
  if (is_special(left) || is_special(right) || left >= size() || right >= size()) {
    throw VocabError("merge operands must be existing regular pieces");
  }
  if (merge_rank_.count({left, right})) throw VocabError("duplicate merge");
  std::string joined = pieces_[static_cast<std::size_t>(left)] + pieces_[static_cast<std::size_t>(right)];
  auto it = regular_ids_.find(joined);
  const std::int32_t result = it != regular_ids_.end() ? it->second : add_piece(std::move(joined));
  merge_rank_.emplace(std::make_pair(left, right), std::make_pair(merges_.size(), result));
  merges_.push_back({left, right, result});
  return merges_.back();
}

std::vector<std::int32_t> Vocab::encode_chunk(std::string_view chunk) const {
  std::vector<std::int32_t> symbols;
  symbols.reserve(chunk.size());
  for (unsigned char c : chunk) symbols.push_back(kNumSpecials + c);
  while (symbols.size() > 1) {
    std::size_t best_rank = merges_.size();
    std::pair<std::int32_t, std::int32_t> best{};
    std::int32_t best_result = -1;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
      if (it != merge_rank_.end() && it->second.first < best_rank) {
        best_rank = it->second.first;
        best = it->first;
        best_result = it->second.second;
      }
    }
    if (best_result < 0) break;
    std::vector<std::int32_t> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == best.first && symbols[i + 1] == best.second) {
        next.push_back(best_result);
        i += 2;
      } else {
        next.push_back(symbols[i]);
        ++i;
      }
    }
    symbols = std::move(next);
  }
  return symbols;
}

std::vector<std::int32_t> Vocab::encode(std::string_view text) const {
  std::vector<std::int32_t> ids;
  for (std::string_view run : split_runs(text)) {
    if (byte_level_) {
      auto piece_ids = encode_chunk(run);
      ids.insert(ids.end(), piece_ids.begin(), piece_ids.end());
    } else if (!is_space_byte(static_cast<unsigned char>(run.front()))) {
      auto it = regular_ids_.find(std::string(run));
      ids.push_back(it == regular_ids_.end() ? kUnkId : it->second);
    }
  }
  return ids;
}

std::string Vocab::decode(std::span<const std::int32_t> ids) const {
  std::string out;
  for (std::int32_t id : ids) {
    if (id < 0 || id >= size()) throw VocabError("id " + std::to_string(id) + " outside vocabulary");
    if (is_special(id)) continue;
    if (!byte_level_ && !out.empty()) out.push_back(' ');
    out += pieces_[static_cast<std::size_t>(id)];
  }
  return out;
}

void Vocab::save(const std::filesystem::path& vocab_file, const std::filesystem::path& merges_file) const {
  {
    std::ofstream out(vocab_file, std::ios::binary | std::ios::trunc);
    if (!out) throw VocabError("cannot write " + vocab_file.string());
    for (std::int32_t id = 0; id < size(); ++id) {
      const auto& p = pieces_[static_cast<std::size_t>(id)];
      out << (is_special(id) ? p : escape_piece(p)) << '\t' << id << '\n';
    }
  }
  std::ofstream out(merges_file, std::ios::binary | std::ios::trunc);
  if (!out) throw VocabError("cannot write " + merges_file.string());
  for (const Merge& m : merges_) {
    out << escape_piece(piece(m.left)) << '\t' << escape_piece(piece(m.right)) << '\n';
  }
}

Vocab Vocab::load(const std::filesystem::path& vocab_file, const std::filesystem::path& merges_file) {
  Vocab v;
  const auto lines = read_lines(vocab_file);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    const auto where = vocab_file.string() + ":" + std::to_string(n + 1);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw VocabError(where + ": expected piece<TAB>id");
    std::int32_t id = -1;
    try {
      std::size_t used = 0;
      id = std::stoi(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) id = -1;
    } catch (const std::exception&) {
      id = -1;
    }
    if (id != static_cast<std::int32_t>(n)) throw VocabError(where + ": ids must be dense and in order");
    const std::string text = line.substr(0, tab);
    if (n < static_cast<std::size_t>(kNumSpecials)) {
      if (text != kSpecialNames[n]) throw VocabError(where + ": expected special " + std::string(kSpecialNames[n]));
      v.pieces_.push_back(text);
      continue;
    }
    std::string piece = unescape_piece(text);
    if (piece.empty() || v.regular_ids_.count(piece)) throw VocabError(where + ": empty or duplicate piece");
    v.add_piece(std::move(piece));
  }
  if (v.size() < kNumSpecials) throw VocabError(vocab_file.string() + ": missing special tokens");

  v.byte_level_ = true;
  for (int b = 0; b < 256 && v.byte_level_; ++b) {
    auto it = v.regular_ids_.find(std::string(1, static_cast<char>(b)));
    v.byte_level_ = it != v.regular_ids_.end() && it->second == kNumSpecials + b;
  }

  if (!merges_file.empty() && std::filesystem::exists(merges_file)) {
    const auto merge_lines = read_lines(merges_file);
    if (!merge_lines.empty() && !v.byte_level_) throw VocabError("merge list given for a word-level vocabulary");
    // The piece table is already complete, so replaying the merges must not
    // grow it.
    const auto expected_size = v.size();
    for (std::size_t n = 0; n < merge_lines.size(); ++n) {
      const auto where = merges_file.string() + ":" + std::to_string(n + 1);
      const auto tab = merge_lines[n].find('\t');
      if (tab == std::string::npos) throw VocabError(where + ": expected left<TAB>right");
      auto left = v.regular_ids_.find(unescape_piece(merge_lines[n].substr(0, tab)));
      auto right = v.regular_ids_.find(unescape_piece(merge_lines[n].substr(tab + 1)));
      if (left == v.regular_ids_.end() || right == v.regular_ids_.end()) {
        throw VocabError(where + ": merge refers to an unknown piece");
      }
      v.add_merge(left->second, right->second);
      if (v.size() != expected_size) throw VocabError(where + ": merge result missing from vocabulary");
    }
  }
  return v;
}

bool Vocab::operator==(const Vocab& other) const {
  if (pieces_ != other.pieces_ || byte_level_ != other.byte_level_ || merges_.size() != other.merges_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const auto& a = merges_[i];
    const auto& b = other.merges_[i];
    if (a.left != b.left || a.right != b.right || a.result != b.result) return false;
  }
  return true;
}

Vocab train_vocab(std::string_view corpus, std::size_t target_size) {
  if (target_size < static_cast<std::size_t>(kByteLevelBaseSize)) {
    throw VocabError("target vocabulary size " + std::to_string(target_size) + " is below the " +
                     std::to_string(kByteLevelBaseSize) + " base pieces");
  }
  if (corpus.empty()) throw VocabError("cannot train a vocabulary on an empty corpus");

  Vocab vocab = Vocab::byte_level();

  std::map<std::string_view, std::size_t> run_counts;
  for (std::string_view run : split_runs(corpus)) ++run_counts[run];

  struct Word {
    std::vector<std::int32_t> symbols;
    std::size_t count;
  };
  std::vector<Word> words;
  words.reserve(run_counts.size());
  for (const auto& [run, count] : run_counts) {
    Word w{{}, count};
    for (unsigned char c : run) w.symbols.push_back(kNumSpecials + c);
    words.push_back(std::move(w));
  }

  while (static_cast<std::size_t>(vocab.size()) < target_size) {
    std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> pair_counts;
    for (const Word& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
    }
    const std::pair<std::int32_t, std::int32_t>* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count < best_count) continue;
      if (count == best_count && best != nullptr) {
        const auto& bl = vocab.piece(best->first);
        const auto& br = vocab.piece(best->second);
        const auto& pl = vocab.piece(pair.first);
        const auto& pr = vocab.piece(pair.second);
        if (std::tie(pl, pr) >= std::tie(bl, br)) continue;
      }
      best = &pair;
      best_count = count;
    }
    if (best == nullptr || best_count < 2) break;

    const auto [left, right] = *best;
    const Merge merge = vocab.add_merge(left, right);
    for (Word& w : words) {
      std::vector<std::int32_t> next;
      next.reserve(w.symbols.size());
      for (std::size_t i = 0; i < w.symbols.size();) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == left && w.symbols[i + 1] == right) {
          next.push_back(merge.result);
          i += 2;
        } else {
          next.push_back(w.symbols[i]);
          ++i;
        }
      }
      w.symbols = std::move(next);
    }
  }
  return vocab;
}

}  // namespace bioner::tokenizer

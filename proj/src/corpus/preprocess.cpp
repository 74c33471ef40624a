// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/corpus/preprocess.hpp"

#include <cstdint>

namespace bioner::corpus {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v' || c == '\n'; }

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace

std::optional<std::size_t> find_invalid_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    std::uint32_t cp;
    if (c >= 0xC2 && c <= 0xDF) {
      len = 2;
      cp = c & 0x1F;
    } else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    const bool overlong = (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    const bool surrogate = cp >= 0xD800 && cp <= 0xDFFF;
    if (overlong || surrogate || cp > 0x10FFFF) return i;
    i += len;
  }
  return std::nullopt;
}

std::size_t count_scalar_values(std::string_view text) {
  std::size_t count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;
  }
  return count;
}

std::string preprocess_raw(std::span<const RawDocument> documents) {
  std::string out;
  for (const RawDocument& doc : documents) {
    if (auto bad = find_invalid_utf8(doc.text)) {
      throw PreprocessError(doc.name + ": invalid UTF-8 at byte offset " + std::to_string(*bad));
    }
    std::string kept;
    for_each_line(doc.text, [&](std::string_view line) {
      line = trim_right(line);
      if (count_scalar_values(line) < kMinSentenceChars) return;
      kept.append(line);
      kept.push_back('\n');
    });
    if (kept.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += kept;
  }
  return out;
}

std::vector<Document> parse_corpus(std::string_view corpus) {
  std::vector<Document> docs;
  bool open = false;
  for_each_line(corpus, [&](std::string_view line) {
    line = trim_right(line);
    if (line.empty()) {
      open = false;
      return;
    }
    if (!open) {
      docs.emplace_back();
      open = true;
    }
    docs.back().sentences.emplace_back(line);
  });
  return docs;
}

CorpusStats corpus_stats(std::string_view corpus) {
  CorpusStats stats;
  for (const Document& doc : parse_corpus(corpus)) {
    ++stats.documents;
    stats.sentences += doc.sentences.size();
    for (const auto& s : doc.sentences) {
      bool in_word = false;
      for (char c : s) {
        if (is_space(c)) {
          in_word = false;
        } else if (!in_word) {
          in_word = true;
          ++stats.words;
        }
      }
    }
  }
  return stats;
}

}  // namespace bioner::corpus

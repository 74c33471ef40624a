// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/ner/spans.hpp"

#include <optional>
#include <stdexcept>

#include "bioner/ner/conll.hpp"

namespace bioner::ner {

std::vector<EntitySpan> decode_spans(std::span<const std::string> labels) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close = [&](std::size_t at) {
    if (open) {
      open->end = at;
      spans.push_back(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto parsed = parse_label(labels[i]);
    if (!parsed || parsed->tag == Tag::kOutside) {
      close(i);
      continue;
    }
    if (parsed->tag == Tag::kInside && open && open->type == parsed->type) continue;
    close(i);
    open = EntitySpan{i, i, parsed->type};
  }
  close(labels.size());
  return spans;
}

std::vector<std::string> encode_spans(std::span<const EntitySpan> spans, std::size_t length) {
  std::vector<std::string> labels(length, "O");
  for (const EntitySpan& s : spans) {
    if (s.start >= s.end || s.end > length) throw std::out_of_range("entity span outside the sentence");
    const std::string suffix = s.type.empty() ? "" : "-" + s.type;
    labels[s.start] = "B" + suffix;
    for (std::size_t i = s.start + 1; i < s.end; ++i) labels[i] = "I" + suffix;
  }
  return labels;
}

}  // namespace bioner::ner

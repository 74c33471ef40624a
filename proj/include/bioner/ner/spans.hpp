// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace bioner::ner {

/// Half-open word range [start, end) with an entity type (empty when the
/// corpus is untyped).
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  auto operator<=>(const EntitySpan&) const = default;
};

/// Maximal B(I...)* runs of one type become spans. An I that follows O, the
/// sentence start, or a span of another type opens a new span. Labels that
/// are not BIO-shaped are treated as O.
std::vector<EntitySpan> decode_spans(std::span<const std::string> labels);

/// Inverse of decode_spans for well-formed label sequences.
std::vector<std::string> encode_spans(std::span<const EntitySpan> spans, std::size_t length);

}  // namespace bioner::ner

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "bioner/ner/conll.hpp"

namespace bioner::ner {

struct EntityScores {
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// Fills precision/recall/f1 from the counts; zero denominators give 0.
  void finalize();
};

/// Exact-match (start, end, type) entity scores. `overall` is micro-averaged
/// over all types.
struct EvaluationReport {
  EntityScores overall;
  std::map<std::string, EntityScores> per_type;
};

/// Gold and predicted sentences are paired by index and must have equal
/// lengths; throws ConllError otherwise. Predicted labels are decoded with
/// the same lenient repair as gold.
EvaluationReport evaluate_entities(std::span<const NerExample> gold, std::span<const NerExample> pred);

/// Human-readable table.
std::string format_report(const EvaluationReport& report);
/// key=value lines, four decimals: precision, recall, f1, counts, and
/// type.<name>.* for each type.
std::string format_report_kv(const EvaluationReport& report);

}  // namespace bioner::ner

// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/ner/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <tuple>

#include "bioner/ner/spans.hpp"

namespace bioner::ner {

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string type_name(const std::string& type) { return type.empty() ? "(untyped)" : type; }

}  // namespace

void EntityScores::finalize() {
  precision = predicted == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(predicted);
  recall = gold == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(gold);
  f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

EvaluationReport evaluate_entities(std::span<const NerExample> gold, std::span<const NerExample> pred) {
  if (gold.size() != pred.size()) {
    throw ConllError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                     std::to_string(pred.size()));
  }
  EvaluationReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].labels.size() != pred[s].labels.size()) {
      throw ConllError("sentence " + std::to_string(s + 1) + ": gold has " + std::to_string(gold[s].labels.size()) +
                       " labels, prediction has " + std::to_string(pred[s].labels.size()));
    }
    const auto gold_spans = decode_spans(gold[s].labels);
    const auto pred_spans = decode_spans(pred[s].labels);
    const std::set<EntitySpan> gold_set(gold_spans.begin(), gold_spans.end());
    for (const auto& span : gold_spans) {
      ++report.overall.gold;
      ++report.per_type[span.type].gold;
    }
    for (const auto& span : pred_spans) {
      ++report.overall.predicted;
      auto& per = report.per_type[span.type];
      ++per.predicted;
      if (gold_set.count(span)) {
        ++report.overall.true_positives;
        ++per.true_positives;
      }
    }
  }
  report.overall.finalize();
  for (auto& [type, scores] : report.per_type) scores.finalize();
  return report;
}

std::string format_report(const EvaluationReport& report) {
  std::string out = "entity-level exact match (micro-averaged over types)\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %10s %10s %10s %8s %8s %8s\n", "type", "precision", "recall", "f1", "tp",
                "pred", "gold");
  out += line;
  auto row = [&](const std::string& name, const EntityScores& s) {
    std::snprintf(line, sizeof(line), "%-16s %10.4f %10.4f %10.4f %8zu %8zu %8zu\n", name.c_str(), s.precision,
                  s.recall, s.f1, s.true_positives, s.predicted, s.gold);
    out += line;
  };
  for (const auto& [type, scores] : report.per_type) row(type_name(type), scores);
  row("overall", report.overall);
  return out;
}

std::string format_report_kv(const EvaluationReport& report) {
  std::string out;
  auto emit = [&](const std::string& prefix, const EntityScores& s) {
    out += prefix + "precision=" + fixed4(s.precision) + "\n";
    out += prefix + "recall=" + fixed4(s.recall) + "\n";
    out += prefix + "f1=" + fixed4(s.f1) + "\n";
    out += prefix + "true_positives=" + std::to_string(s.true_positives) + "\n";
    out += prefix + "predicted=" + std::to_string(s.predicted) + "\n";
    out += prefix + "gold=" + std::to_string(s.gold) + "\n";
  };
  out += "averaging=micro\n";
  emit("", report.overall);
  for (const auto& [type, scores] : report.per_type) emit("type." + type_name(type) + ".", scores);
  return out;
}

}  // namespace bioner::ner

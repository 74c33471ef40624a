// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "bioner/ner/conll.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bioner/ner/spans.hpp"

namespace bioner::ner {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) cols.push_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConllError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<ParsedLabel> parse_label(std::string_view label) {
  if (label == "O") return ParsedLabel{Tag::kOutside, ""};
  if (label.empty() || (label[0] != 'B' && label[0] != 'I')) return std::nullopt;
  const Tag tag = label[0] == 'B' ? Tag::kBegin : Tag::kInside;
  if (label.size() == 1) return ParsedLabel{tag, ""};
  if (label[1] != '-' || label.size() == 2) return std::nullopt;
  return ParsedLabel{tag, std::string(label.substr(2))};
}

LabelSet::LabelSet(std::span<const std::string> labels) {
  bool has_outside = false;
  std::map<std::string, std::pair<bool, bool>> types;  // type -> (has B, has I)
  for (const auto& l : labels) {
    const auto parsed = parse_label(l);
    if (!parsed) throw ConllError("label '" + l + "' is not a BIO label");
    if (parsed->tag == Tag::kOutside) {
      has_outside = true;
    } else if (parsed->tag == Tag::kBegin) {
      types[parsed->type].first = true;
    } else {
      types[parsed->type].second = true;
    }
  }
  if (!has_outside) throw ConllError("label set has no 'O' label");
  labels_.push_back("O");
  for (const auto& [type, present] : types) {
    const std::string suffix = type.empty() ? "" : "-" + type;
    if (present.second && !present.first) throw ConllError("label 'I" + suffix + "' has no matching 'B" + suffix + "'");
    labels_.push_back("B" + suffix);
    if (present.second) labels_.push_back("I" + suffix);
  }
}

std::optional<std::int32_t> LabelSet::id(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::int32_t>(it - labels_.begin());
}

std::string LabelSet::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) out += ',';
    out += labels_[i];
  }
  return out;
}

LabelSet LabelSet::deserialize(std::string_view text) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    labels.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  LabelSet set(labels);
  if (set.labels() != labels) throw ConllError("serialized label set is not in canonical order: " + std::string(text));
  return set;
}

ConllData parse_conll(std::string_view text, std::string_view source) {
  ConllData data;
  NerExample current;
  std::set<std::string> observed;
  std::map<std::string, std::size_t> first_line;
  auto flush = [&] {
    if (!current.words.empty()) data.examples.push_back(std::move(current));
    current = NerExample{};
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    const auto cols = split_ws(line);
    if (cols.empty()) {
      flush();
      continue;
    }
    if (cols.front().starts_with("-DOCSTART-")) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (cols.size() < 2) throw ConllError(where + ": missing label column");
    const std::string label(cols.back());
    if (!parse_label(label)) throw ConllError(where + ": '" + label + "' is not a BIO label");
    current.words.emplace_back(cols.front());
    current.labels.push_back(label);
    if (observed.insert(label).second) first_line[label] = line_no;
  }
  flush();

  if (data.examples.empty()) return data;
  observed.insert("O");
  for (const auto& label : observed) {
    const auto parsed = parse_label(label);
    if (parsed->tag != Tag::kInside) continue;
    const std::string begin = "B" + (parsed->type.empty() ? "" : "-" + parsed->type);
    if (!observed.count(begin)) {
      throw ConllError(std::string(source) + ":" + std::to_string(first_line[label]) + ": label '" + label +
                       "' appears without any '" + begin + "'");
    }
  }
  data.labels = LabelSet(std::vector<std::string>(observed.begin(), observed.end()));
  return data;
}

ConllData read_conll(const std::filesystem::path& path) { return parse_conll(read_file(path), path.string()); }

std::vector<NerExample> parse_conll_words(std::string_view text) {
  std::vector<NerExample> out;
  NerExample current;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto cols = split_ws(text.substr(start, end - start));
    start = end + 1;
    if (cols.empty()) {
      if (!current.words.empty()) out.push_back(std::move(current));
      current = NerExample{};
    } else if (!cols.front().starts_with("-DOCSTART-")) {
      current.words.emplace_back(cols.front());
    }
  }
  if (!current.words.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<NerExample> read_conll_words(const std::filesystem::path& path) {
  return parse_conll_words(read_file(path));
}

std::string format_conll(std::span<const NerExample> examples) {
  std::string out;
  for (const NerExample& ex : examples) {
    for (std::size_t i = 0; i < ex.words.size(); ++i) out += ex.words[i] + "\t" + ex.labels[i] + "\n";
    out += "\n";
  }
  return out;
}

DatasetStats dataset_stats(std::span<const NerExample> examples) {
  DatasetStats stats;
  for (const NerExample& ex : examples) {
    ++stats.sentences;
    stats.tokens += ex.words.size();
    stats.annotations += decode_spans(ex.labels).size();
  }
  return stats;
}

DatasetStats dataset_stats(const std::filesystem::path& path) { return dataset_stats(read_conll(path).examples); }

}  // namespace bioner::ner

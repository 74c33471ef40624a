// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "bioner/ner/align.hpp"
#include "bioner/ner/conll.hpp"
#include "bioner/ner/metrics.hpp"
#include "bioner/ner/spans.hpp"
#include "bioner/numerics/ops.hpp"
#include "bioner/numerics/rng.hpp"
#include "oracles.hpp"

using namespace bioner;
using namespace bioner::ner;
using Labels = std::vector<std::string>;

namespace {

const std::filesystem::path kData{BIONER_TEST_DATA};

void merge(tokenizer::Vocab& v, const std::string& left, const std::string& right) {
  v.add_merge(*v.find(left), *v.find(right));
}

Labels random_labels(Rng& rng, std::size_t n, bool legal) {
  static const std::vector<std::string> types{"Chem", "Dis"};
  Labels out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rng.uniform_int(3);
    const std::string type = types[rng.uniform_int(types.size())];
    if (r == 0) {
      out.push_back("O");
    } else if (r == 1) {
      out.push_back("B-" + type);
    } else if (!legal) {
      out.push_back("I-" + type);
    } else if (!out.empty() && out.back() != "O") {
      out.push_back("I-" + out.back().substr(2));
    } else {
      out.push_back("O");
    }
  }
  return out;
}

std::vector<EntitySpan> spans_of(const Labels& labels) { return decode_spans(labels); }

NerExample sentence(Labels labels) {
  NerExample ex;
  ex.words.assign(labels.size(), "w");
  ex.labels = std::move(labels);
  return ex;
}

}  // namespace

TEST_CASE("read_conll examples") {
  auto data = parse_conll("aspirin B\nhelps O\n\n");
  REQUIRE(data.examples.size() == 1);
  CHECK(data.examples[0].words == Labels{"aspirin", "helps"});
  CHECK(data.examples[0].labels == Labels{"B", "O"});

  data = parse_conll("a B\n\nb O\nc O\n");
  CHECK(data.examples.size() == 2);

  data = parse_conll("-DOCSTART- -X- O O\n\nx B-Chem\ny I-Chem\nz O\n");
  CHECK(data.labels.labels() == Labels{"O", "B-Chem", "I-Chem"});
  CHECK(data.examples.size() == 1);

  data = parse_conll("tok POS chunk B-Dis\r\n");
  CHECK(data.examples[0].words == Labels{"tok"});
  CHECK(data.examples[0].labels == Labels{"B-Dis"});
}

TEST_CASE("read_conll errors carry line numbers") {
  auto message = [](std::string_view text) {
    try {
      parse_conll(text, "f.conll");
    } catch (const ConllError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("a O\nlonely\n").find("f.conll:2") != std::string::npos);
  CHECK(message("a O\nb I-Chem\n").find("f.conll:2") != std::string::npos);
  CHECK(message("a O\nb X-Chem\n").find("f.conll:2") != std::string::npos);
  CHECK(message("a B-Chem\nb I-Chem\n").empty());
}

TEST_CASE("label set ordering and serialization") {
  const Labels raw{"I-Dis", "O", "B-Dis", "B-Chem"};
  const LabelSet set(raw);
  CHECK(set.labels() == Labels{"O", "B-Chem", "B-Dis", "I-Dis"});
  CHECK(LabelSet::deserialize(set.serialize()) == set);
  CHECK_THROWS_AS(LabelSet(Labels{"B"}), ConllError);
  CHECK_THROWS_AS(LabelSet(Labels{"O", "I"}), ConllError);
  CHECK_THROWS_AS(LabelSet::deserialize("B,O"), ConllError);
}

TEST_CASE("first-piece alignment") {
  auto vocab = tokenizer::Vocab::byte_level();
  merge(vocab, "m", "y");
  merge(vocab, "my", "o");
  merge(vocab, "c", "a");
  merge(vocab, "ca", "r");
  merge(vocab, "car", "d");
  merge(vocab, "card", "i");
  merge(vocab, "cardi", "a");
  merge(vocab, "cardia", "l");
  const auto pieces = vocab.encode("myocardial");
  REQUIRE(pieces.size() == 2);
  CHECK(vocab.piece(pieces[0]) == "myo");
  CHECK(vocab.piece(pieces[1]) == "cardial");

  const LabelSet labels(Labels{"O", "B", "I"});
  NerExample ex{{"myocardial", "x"}, {"B", "O"}};
  const auto aligned = align_subwords(ex, vocab, labels, 8);
  CHECK(aligned.input.token_ids ==
        std::vector<std::int32_t>{tokenizer::kClsId, pieces[0], pieces[1], *vocab.find("x"), tokenizer::kSepId, 0, 0, 0});
  const auto ig = ops::kIgnoreIndex;
  CHECK(aligned.labels == std::vector<std::int32_t>{ig, *labels.id("B"), ig, *labels.id("O"), ig, ig, ig, ig});
  CHECK(aligned.word_positions == std::vector<std::size_t>{1, 3});
}

TEST_CASE("alignment fits exactly and truncates by whole words") {
  const auto vocab = tokenizer::Vocab::byte_level();
  const LabelSet labels(Labels{"O", "B"});
  NerExample exact{{"a", "b", "c", "d"}, {"B", "O", "O", "B"}};
  const auto fit = align_subwords(exact, vocab, labels, 6);
  CHECK(fit.word_positions.size() == 4);
  for (std::size_t p : fit.word_positions) CHECK(fit.labels[p] != ops::kIgnoreIndex);

  NerExample long_sentence;
  for (int i = 0; i < 100; ++i) {
    long_sentence.words.push_back(i % 3 == 0 ? "abc" : "z");
    long_sentence.labels.push_back(i % 2 ? "O" : "B");
  }
  // Simulated word-granular truncation: 14 piece slots between [CLS] and [SEP].
  std::size_t used = 0, kept = 0;
  for (const auto& w : long_sentence.words) {
    if (used + w.size() > 14) break;
    used += w.size();
    ++kept;
  }
  const auto cut = align_subwords(long_sentence, vocab, labels, 16);
  CHECK(cut.word_positions.size() == kept);
  CHECK(cut.input.token_ids[used + 1] == tokenizer::kSepId);
  CHECK(cut.input.length() == 16);

  NerExample giant{{std::string(20, 'q')}, {"B"}};
  CHECK_THROWS_AS(align_subwords(giant, vocab, labels, 16), ConllError);
  CHECK_THROWS_AS(align_subwords(NerExample{}, vocab, labels, 16), ConllError);
  NerExample unknown{{"a"}, {"I-Zzz"}};
  CHECK_THROWS_AS(align_subwords(unknown, vocab, labels, 16), ConllError);
}

TEST_CASE("lowercasing before encoding") {
  const auto vocab = tokenizer::Vocab::from_words({"aspirin"});
  const LabelSet labels(Labels{"O", "B"});
  NerExample ex{{"Aspirin"}, {"B"}};
  CHECK(align_subwords(ex, vocab, labels, 4, true).input.token_ids[1] == *vocab.find("aspirin"));
  CHECK(align_subwords(ex, vocab, labels, 4, false).input.token_ids[1] == tokenizer::kUnkId);
  CHECK(ascii_lower("ÄBc") == "Äbc");
}

TEST_CASE("decode_spans examples") {
  CHECK(spans_of({"B", "I", "O", "B"}) == std::vector<EntitySpan>{{0, 2, ""}, {3, 4, ""}});
  CHECK(spans_of({"O", "I", "I"}) == std::vector<EntitySpan>{{1, 3, ""}});
  CHECK(spans_of({"B-Chem", "I-Dis"}) == std::vector<EntitySpan>{{0, 1, "Chem"}, {1, 2, "Dis"}});
  CHECK(spans_of({"B", "B"}) == std::vector<EntitySpan>{{0, 1, ""}, {1, 2, ""}});
  CHECK(spans_of({}).empty());
}

TEST_CASE("decode and encode round trip on legal sequences") {
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    const auto labels = random_labels(rng, rng.uniform_int(20), true);
    const auto spans = decode_spans(labels);
    REQUIRE(encode_spans(spans, labels.size()) == labels);
  }
}

TEST_CASE("decode_spans agrees with the interval-enumeration oracle") {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const auto labels = random_labels(rng, rng.uniform_int(12), false);
    const auto spans = decode_spans(labels);
    const auto oracle = testing::oracle_spans(labels);
    REQUIRE(spans.size() == oracle.size());
    for (std::size_t k = 0; k < spans.size(); ++k) {
      CHECK(spans[k].start == oracle[k].start);
      CHECK(spans[k].end == oracle[k].end);
      CHECK(spans[k].type == oracle[k].type);
    }
  }
}

TEST_CASE("entity metrics examples") {
  const std::vector<NerExample> gold{sentence({"B", "I", "O", "B"})};
  auto r = evaluate_entities(gold, gold);
  CHECK(r.overall.precision == 1.0);
  CHECK(r.overall.recall == 1.0);
  CHECK(r.overall.f1 == 1.0);

  const std::vector<NerExample> pred{sentence({"B", "O", "O", "B"})};
  r = evaluate_entities(gold, pred);
  CHECK(r.overall.true_positives == 1);
  CHECK(r.overall.precision == 0.5);
  CHECK(r.overall.recall == 0.5);
  CHECK(r.overall.f1 == 0.5);

  const std::vector<NerExample> none{sentence({"O", "O", "O", "O"})};
  r = evaluate_entities(gold, none);
  CHECK(r.overall.precision == 0.0);
  CHECK(r.overall.recall == 0.0);
  CHECK(r.overall.f1 == 0.0);

  const std::vector<NerExample> shorter{sentence({"O"})};
  CHECK_THROWS_AS(evaluate_entities(gold, shorter), ConllError);
  CHECK_THROWS_AS(evaluate_entities(gold, std::vector<NerExample>{}), ConllError);

  const auto kv = format_report_kv(evaluate_entities(gold, pred));
  CHECK(kv.find("f1=0.5000\n") != std::string::npos);
  CHECK(kv.find("averaging=micro\n") != std::string::npos);
}

TEST_CASE("entity metrics equal the brute-force oracle") {
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<NerExample> gold, pred;
    const std::size_t n = 1 + rng.uniform_int(4);
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t len = rng.uniform_int(10);
      gold.push_back(sentence(random_labels(rng, len, false)));
      pred.push_back(sentence(random_labels(rng, len, false)));
    }
    const auto report = evaluate_entities(gold, pred);
    const auto oracle = testing::oracle_counts(gold, pred);
    REQUIRE(report.overall.true_positives == oracle.true_positives);
    REQUIRE(report.overall.predicted == oracle.predicted);
    REQUIRE(report.overall.gold == oracle.gold);
    CHECK(report.overall.precision == oracle.precision());
    CHECK(report.overall.recall == oracle.recall());
    CHECK(report.overall.f1 == oracle.f1());
    for (const auto& [type, scores] : report.per_type) {
      const auto per = testing::oracle_counts(gold, pred, &type);
      CHECK(scores.true_positives == per.true_positives);
      CHECK(scores.f1 == per.f1());
    }

    // Swapping gold and prediction exchanges precision and recall.
    const auto swapped = evaluate_entities(pred, gold);
    CHECK(swapped.overall.precision == report.overall.recall);
    CHECK(swapped.overall.recall == report.overall.precision);
    CHECK(swapped.overall.f1 == doctest::Approx(report.overall.f1).epsilon(1e-15));
  }
}

TEST_CASE("dataset statistics") {
  CHECK(dataset_stats(kData / "two_spans.conll") == DatasetStats{2, 4, 2});
  CHECK(dataset_stats(std::vector<NerExample>{}) == DatasetStats{});
  // Hand count: 1 + 2 + 0 + 2 + 3 + 1 + 3 entities over 7 sentences and 40 tokens.
  CHECK(dataset_stats(kData / "disease_fixture.conll") == DatasetStats{7, 40, 12});
}

TEST_CASE("word-only reader for prediction input") {
  const auto ex = parse_conll_words("-DOCSTART-\n\nAspirin\thelps\nnow\n\n\nyes\n");
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].words == Labels{"Aspirin", "now"});
  CHECK(ex[0].labels.empty());
  CHECK(format_conll(std::vector<NerExample>{{{"a", "b"}, {"B", "O"}}}) == "a\tB\nb\tO\n\n");
}

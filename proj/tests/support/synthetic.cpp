// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bioner/numerics/rng.hpp"

namespace bioner::testing {

model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.vocab_size = 100;
  c.embedding_size = 8;
  c.hidden_size = 16;
  c.num_heads = 2;
  c.num_layers = 3;
  c.intermediate_size = 64;
  c.max_positions = 32;
  return c;
}

std::vector<std::string> BandCorpus::words() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + tokenizer::kNumSpecials < vocab_size; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%03zu", i);
    out.emplace_back(buf);
  }
  return out;
}

tokenizer::Vocab BandCorpus::vocab() const { return tokenizer::Vocab::from_words(words()); }

std::string BandCorpus::text(std::size_t documents, std::uint64_t seed) const {
  const auto all = words();
  const std::size_t per_band = all.size() / bands;
  // Band b owns words [b*per_band, (b+1)*per_band); its Zipf ranks follow
  // a band-specific permutation.
  std::vector<std::vector<std::size_t>> rank_to_word(bands);
  for (std::size_t b = 0; b < bands; ++b) {
    auto& order = rank_to_word[b];
    for (std::size_t i = 0; i < per_band; ++i) order.push_back(b * per_band + i);
    Rng perm = Rng::derive(layout_seed, "band-permutation", b);
    perm.shuffle(order);
  }
  std::vector<double> cdf(per_band);
  double z = 0;
  for (std::size_t r = 0; r < per_band; ++r) cdf[r] = (z += std::pow(static_cast<double>(r + 1), -zipf_exponent));
  for (double& c : cdf) c /= z;

  Rng rng = Rng::derive(seed, "band-corpus");
  std::string out;
  for (std::size_t d = 0; d < documents; ++d) {
    if (d) out += "\n";
    for (std::size_t b = 0; b < bands; ++b) {
      const std::size_t len = min_words + rng.uniform_int(max_words - min_words + 1);
      for (std::size_t w = 0; w < len; ++w) {
        const double u = rng.uniform();
        std::size_t r = 0;
        while (r + 1 < per_band && cdf[r] <= u) ++r;
        if (w) out += ' ';
        out += all[rank_to_word[b][r]];
      }
      out += "\n";
    }
  }
  return out;
}

const std::vector<std::string>& Gazetteer::chemicals() {
  static const std::vector<std::string> v = {"aspirin",   "heparin",  "warfarin", "cisplatin", "tamoxifen",
                                             "metformin", "lithium",  "caffeine", "morphine",  "insulin"};
  return v;
}

const std::vector<std::string>& Gazetteer::diseases() {
  static const std::vector<std::string> v = {"asthma",   "diabetes", "leukemia",  "melanoma", "sepsis",
                                             "epilepsy", "anemia",   "psoriasis", "glaucoma", "gout"};
  return v;
}

const std::vector<Gazetteer::Phrase>& Gazetteer::chemical_phrases() {
  static const std::vector<Phrase> v = {
      {"sodium", "chloride"}, {"folic", "acid"}, {"nitric", "oxide"}, {"valproic", "acid"}, {"retinoic", "acid"}};
  return v;
}

const std::vector<Gazetteer::Phrase>& Gazetteer::disease_phrases() {
  static const std::vector<Phrase> v = {
      {"breast", "cancer"}, {"heart", "failure"}, {"renal", "failure"}, {"lung", "cancer"}, {"crohn", "disease"}};
  return v;
}

std::vector<std::string> Gazetteer::words() {
  std::vector<std::string> out = chemicals();
  out.insert(out.end(), diseases().begin(), diseases().end());
  for (const auto* phrases : {&chemical_phrases(), &disease_phrases()}) {
    for (const auto& [first, second] : *phrases) {
      for (const auto& w : {first, second}) {
        if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
      }
    }
  }
  out.insert(out.end(), fillers().begin(), fillers().end());
  return out;
}

const std::vector<std::string>& Gazetteer::fillers() {
  static const std::vector<std::string> v = {
      "the",     "patient", "was",     "given",  "for",      "with",     "and",       "after",
      "of",      "in",      "a",       "dose",   "treated",  "showed",   "reduced",   "risk",
      "study",   "cases",   "we",      "report", "daily",    "therapy",  "induced",   "severe",
      "chronic", "acute",   "trial",   "effect", "response", "patients", "received",  "mg",
      "levels",  "blood",   "history", "onset",  "control",  "group",    "increased", "clinical"};
  return v;
}

namespace {

const std::string& pick(const std::vector<std::string>& v, Rng& rng) { return v[rng.uniform_int(v.size())]; }

ner::NerExample gazetteer_sentence(Rng& rng, Gazetteer::TwoWord mode) {
  ner::NerExample ex;
  const std::size_t len = 6 + rng.uniform_int(7);
  while (ex.words.size() < len) {
    const double u = rng.uniform();
    if (u < 0.25) {
      const bool chem = rng.bernoulli(0.5);
      const std::string type = chem ? "Chemical" : "Disease";
      const auto& singles = chem ? Gazetteer::chemicals() : Gazetteer::diseases();
      if (!rng.bernoulli(0.3)) {
        ex.words.push_back(pick(singles, rng));
        ex.labels.push_back("B-" + type);
      } else if (mode == Gazetteer::TwoWord::kAnyPair) {
        ex.words.push_back(pick(singles, rng));
        ex.words.push_back(pick(singles, rng));
        ex.labels.insert(ex.labels.end(), {"B-" + type, "I-" + type});
      } else {
        const auto& phrases = chem ? Gazetteer::chemical_phrases() : Gazetteer::disease_phrases();
        const auto& [first, second] = phrases[rng.uniform_int(phrases.size())];
        ex.words.insert(ex.words.end(), {first, second});
        ex.labels.insert(ex.labels.end(), {"B-" + type, "I-" + type});
      }
      // A filler always follows so adjacent entities never merge.
      ex.words.push_back(pick(Gazetteer::fillers(), rng));
      ex.labels.push_back("O");
    } else {
      ex.words.push_back(pick(Gazetteer::fillers(), rng));
      ex.labels.push_back("O");
    }
  }
  return ex;
}

}  // namespace

std::vector<ner::NerExample> Gazetteer::sentences(std::size_t count, std::uint64_t seed, TwoWord mode) {
  Rng rng = Rng::derive(seed, "gazetteer");
  std::vector<ner::NerExample> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(gazetteer_sentence(rng, mode));
  return out;
}

std::string Gazetteer::corpus_text(std::size_t documents, std::size_t sentences_per_document, std::uint64_t seed,
                                   TwoWord mode) {
  const auto sents = sentences(documents * sentences_per_document, seed, mode);
  std::string out;
  for (std::size_t d = 0; d < documents; ++d) {
    if (d) out += "\n";
    for (std::size_t s = 0; s < sentences_per_document; ++s) {
      const auto& words = sents[d * sentences_per_document + s].words;
      for (std::size_t w = 0; w < words.size(); ++w) out += (w ? " " : "") + words[w];
      out += "\n";
    }
  }
  return out;
}

}  // namespace bioner::testing

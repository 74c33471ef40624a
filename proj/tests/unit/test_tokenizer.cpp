// Copyright 2026 The bioner Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bioner/numerics/rng.hpp"
#include "bioner/tokenizer/input.hpp"
#include "bioner/tokenizer/vocab.hpp"

using namespace bioner;
using namespace bioner::tokenizer;

namespace {

std::int32_t byte_id(char c) { return kNumSpecials + static_cast<unsigned char>(c); }

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bioner_tok_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("byte-level base vocabulary") {
  const Vocab v = Vocab::byte_level();
  CHECK(v.size() == kByteLevelBaseSize);
  CHECK(v.piece(kPadId) == "[PAD]");
  CHECK(v.piece(kMaskId) == "[MASK]");
  CHECK(*v.find("a") == byte_id('a'));
  CHECK(v.merges().empty());
}

TEST_CASE("train_vocab first merges") {
  const Vocab abab = train_vocab("abab abab", 262);
  REQUIRE(abab.merges().size() == 1);
  CHECK(abab.merges()[0].left == byte_id('a'));
  CHECK(abab.merges()[0].right == byte_id('b'));
  CHECK(abab.piece(abab.merges()[0].result) == "ab");

  const Vocab zz = train_vocab("zzzz", 262);
  REQUIRE(zz.merges().size() == 1);
  CHECK(zz.piece(zz.merges()[0].result) == "zz");

  const Vocab base = train_vocab("the quick brown fox", 261);
  CHECK(base.size() == 261);
  CHECK(base.merges().empty());
}

TEST_CASE("train_vocab errors and stopping") {
  CHECK_THROWS_AS(train_vocab("", 300), VocabError);
  CHECK_THROWS_AS(train_vocab("abc", 260), VocabError);
  // Every pair occurs once: no pair repeats, so no merge is learned.
  CHECK(train_vocab("abcdef", 300).merges().empty());
}

TEST_CASE("train_vocab ties break by lexicographic pair order") {
  // (a,b) and (c,d) both occur twice; (a,b) sorts first.
  const Vocab v = train_vocab("ab cd ab cd", 262);
  REQUIRE(v.merges().size() == 1);
  CHECK(v.piece(v.merges()[0].result) == "ab");
}

TEST_CASE("train_vocab is deterministic") {
  const std::string corpus = "myocardial infarction\nmyocardial ischemia\ncardiac arrest\n";
  const Vocab a = train_vocab(corpus, 300), b = train_vocab(corpus, 300);
  CHECK(a == b);
}

TEST_CASE("encode examples") {
  const Vocab v = train_vocab("abab abab", 262);
  CHECK(v.encode("").empty());
  const auto ab = v.encode("ab");
  REQUIRE(ab.size() == 1);
  CHECK(v.piece(ab[0]) == "ab");
  const Vocab bio = train_vocab("myocardial infarction myocardial", 320);
  CHECK(bio.decode(bio.encode("myocardial infarction")) == "myocardial infarction");
  for (auto id : bio.encode("myocardial infarction")) CHECK((id >= 0 && id < bio.size()));
}

TEST_CASE("encode/decode round trip on random byte strings") {
  const Vocab v = train_vocab("the patient was treated with aspirin and heparin for the pain", 300);
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    std::string s(rng.uniform_int(40), '\0');
    for (char& c : s) c = static_cast<char>(rng.uniform_int(256));
    const auto ids = v.encode(s);
    for (auto id : ids) CHECK_FALSE(Vocab::is_special(id));
    CHECK(v.decode(ids) == s);
  }
}

TEST_CASE("decode skips specials and rejects unknown ids") {
  const Vocab v = Vocab::byte_level();
  const std::vector<std::int32_t> ids{kClsId, byte_id('h'), byte_id('i'), kSepId, kPadId};
  CHECK(v.decode(ids) == "hi");
  const std::vector<std::int32_t> bad{9999};
  CHECK_THROWS_AS(v.decode(bad), VocabError);
}

TEST_CASE("vocab files round trip and are validated") {
  const auto dir = scratch("files");
  const Vocab v = train_vocab("tab\there [bracket] back\\slash caf\xc3\xa9 caf\xc3\xa9 tab\there", 300);
  v.save(dir / "vocab.txt", dir / "merges.txt");
  CHECK(Vocab::load(dir / "vocab.txt", dir / "merges.txt") == v);

  std::ifstream in(dir / "vocab.txt");
  std::string first;
  std::getline(in, first);
  CHECK(first == "[PAD]\t0");

  std::ofstream(dir / "bad.txt") << "[PAD]\t0\n[UNK]\t2\n";
  CHECK_THROWS_AS(Vocab::load(dir / "bad.txt", dir / "none.txt"), VocabError);
  std::ofstream(dir / "dup.txt") << "[PAD]\t0\n[UNK]\t1\n[CLS]\t2\n[SEP]\t3\n[MASK]\t4\nx\t5\nx\t6\n";
  CHECK_THROWS_AS(Vocab::load(dir / "dup.txt", dir / "none.txt"), VocabError);
  CHECK_THROWS_AS(Vocab::load(dir / "missing.txt", dir / "none.txt"), VocabError);
}

TEST_CASE("word-level vocabulary") {
  const Vocab v = Vocab::from_words({"alpha", "beta"});
  CHECK(v.size() == 7);
  const auto ids = v.encode("alpha gamma  beta");
  CHECK(ids == std::vector<std::int32_t>{5, kUnkId, 6});
  const std::vector<std::int32_t> known{5, 6};
  CHECK(v.decode(known) == "alpha beta");
  CHECK_THROWS_AS(Vocab::from_words({"a", "a"}), VocabError);
}

TEST_CASE("build_input_pair examples") {
  const std::vector<std::int32_t> a{7, 8}, none;
  auto s = build_input_pair(a, none, 6);
  CHECK(s.token_ids == std::vector<std::int32_t>{kClsId, 7, 8, kSepId, kPadId, kPadId});
  CHECK(s.attention_mask == std::vector<std::int32_t>{1, 1, 1, 1, 0, 0});
  CHECK(s.type_ids == std::vector<std::int32_t>(6, 0));

  const std::vector<std::int32_t> five{5}, six{6};
  s = build_input_pair(five, six, 5);
  CHECK(s.token_ids == std::vector<std::int32_t>{kClsId, 5, kSepId, 6, kSepId});
  CHECK(s.type_ids == std::vector<std::int32_t>{0, 0, 0, 1, 1});

  const std::vector<std::int32_t> long_a(400, 10), long_b(300, 11);
  s = build_input_pair(long_a, long_b, 512);
  CHECK(s.length() == 512);
  CHECK(std::count(s.token_ids.begin(), s.token_ids.end(), 10) == 255);
  CHECK(std::count(s.token_ids.begin(), s.token_ids.end(), 11) == 254);

  CHECK_THROWS_AS(build_input_pair(a, none, 2), VocabError);
  CHECK_THROWS_AS(build_input_pair(five, six, 4), VocabError);
}

TEST_CASE("build_input_pair invariants on random inputs") {
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::int32_t> a(1 + rng.uniform_int(30)), b(rng.uniform_int(30));
    for (auto& x : a) x = static_cast<std::int32_t>(5 + rng.uniform_int(50));
    for (auto& x : b) x = static_cast<std::int32_t>(5 + rng.uniform_int(50));
    const std::size_t max_len = 5 + rng.uniform_int(40);
    const auto s = build_input_pair(a, b, max_len);
    REQUIRE(s.length() == max_len);
    REQUIRE(s.type_ids.size() == max_len);
    REQUIRE(s.attention_mask.size() == max_len);
    CHECK(s.token_ids[0] == kClsId);
    bool after_first_sep = false;
    for (std::size_t t = 0; t < max_len; ++t) {
      CHECK(s.attention_mask[t] == (s.token_ids[t] != kPadId ? 1 : 0));
      if (s.token_ids[t] == kPadId) CHECK(s.type_ids[t] == 0);
      if (!after_first_sep) CHECK(s.type_ids[t] == 0);
      if (s.token_ids[t] == kSepId) after_first_sep = true;
    }
  }
}

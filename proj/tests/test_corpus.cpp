// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "natalign/corpus/classifier_data.hpp"
#include "natalign/corpus/loader.hpp"
#include "natalign/corpus/tokenizer.hpp"
#include "natalign/corpus/vocabulary.hpp"
#include "test_util.hpp"

namespace natalign {
namespace {

using Tokens = std::vector<Token>;

TEST(Tokenize, SplitsPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("Hello, world!", true).tokens, (Tokens{"hello", ",", "world", "!"}));
  EXPECT_EQ(tokenize("Hello, world!", false).tokens, (Tokens{"Hello", ",", "world", "!"}));
}

TEST(Tokenize, EmptyAndWhitespaceRuns) {
  EXPECT_TRUE(tokenize("").tokens.empty());
  EXPECT_TRUE(tokenize(" \t ").tokens.empty());
  EXPECT_EQ(tokenize("a  b").tokens, (Tokens{"a", "b"}));
}

TEST(Tokenize, KeepsRawAndHandlesTypographicMarks) {
  const auto s = tokenize("„Zo…” zei ze — «ja»");
  EXPECT_EQ(s.raw, "„Zo…” zei ze — «ja»");
  EXPECT_EQ(s.tokens, (Tokens{"„", "Zo", "…", "”", "zei", "ze", "—", "«", "ja", "»"}));
}

TEST(Tokenize, LowercasesLatin1) {
  EXPECT_EQ(tokenize("ÉÉN Ölie", true).tokens, (Tokens{"één", "ölie"}));
}

TEST(Tokenize, IdempotentOnRejoinProperty) {
  Rng rng(7);
  const std::vector<std::string> pieces = {"a", "Bc", ".", ",", "!", "…", " ", "  ", "é", "x-y",
                                           "'s", "\t", "«", "7", "??"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string raw;
    const std::size_t n = rng.index(12);
    for (std::size_t i = 0; i < n; ++i) raw += pieces[rng.index(pieces.size())];
    for (bool lower : {false, true}) {
      const auto once = tokenize(raw, lower);
      const auto twice = tokenize(join_tokens(once.tokens), lower);
      ASSERT_EQ(once.tokens, twice.tokens) << raw;
      ASSERT_EQ(once.tokens, tokenize(raw, lower).tokens);
      for (const auto& t : once.tokens) {
        ASSERT_FALSE(t.empty());
        ASSERT_EQ(t.find_first_of(" \t\n"), std::string::npos);
      }
    }
  }
}

std::vector<Sentence> sentences(std::initializer_list<const char*> raws) {
  std::vector<Sentence> out;
  for (auto r : raws) out.push_back(tokenize(r));
  return out;
}

TEST(Vocabulary, SpecialsAtFixedIds) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 6);
  EXPECT_EQ(v.id("<pad>"), 0);
  EXPECT_EQ(v.id("<s>"), 1);
  EXPECT_EQ(v.id("</s>"), 2);
  EXPECT_EQ(v.id("<unk>"), 3);
  EXPECT_EQ(v.id("<orig>"), 4);
  EXPECT_EQ(v.id("<tran>"), 5);
}

TEST(Vocabulary, CutoffMapsRareTokensToUnk) {
  const auto v = build_vocab(sentences({"a a b"}), 2);
  EXPECT_EQ(v.size(), 7);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
  EXPECT_EQ(v.id("b"), Vocabulary::kUnk);
}

TEST(Vocabulary, MinFreqOneAndEmptyCorpus) {
  const auto v = build_vocab(sentences({"a b"}), 1);
  EXPECT_EQ(v.size(), 8);
  EXPECT_TRUE(v.contains("a") && v.contains("b"));
  EXPECT_EQ(build_vocab({}, 1).size(), 6);
  EXPECT_THROW(build_vocab({}, 0), ConfigError);
}

TEST(Vocabulary, BijectionAndRoundTrip) {
  const auto v = build_vocab(sentences({"de kat zat op de mat", "de hond"}), 1);
  std::set<Token> seen;
  for (int i = 0; i < v.size(); ++i) {
    EXPECT_EQ(v.id(v.token(i)), i);
    EXPECT_TRUE(seen.insert(v.token(i)).second);
  }
  EXPECT_EQ(v.token(6), "de");  // most frequent first
  std::stringstream ss;
  v.save(ss);
  EXPECT_EQ(Vocabulary::load(ss), v);
  std::stringstream bad("<pad>\n<s>\n");
  EXPECT_THROW(Vocabulary::load(bad), DataError);
}

TEST(Vocabulary, DecodeDropsControlTokens) {
  const auto v = build_vocab(sentences({"a b"}), 1);
  EXPECT_EQ(v.decode({1, 4, v.id("a"), 3, 2, 0}), (Tokens{"a", "<unk>"}));
}

class LoaderTest : public ::testing::Test {
 protected:
  testing::TempDir dir{"loader"};

  void write_parallel(const std::string& id, int n_src, int n_tgt) {
    std::string s, t;
    for (int i = 0; i < n_src; ++i) s += "bron " + std::to_string(i) + " .\n";
    for (int i = 0; i < n_tgt; ++i) t += "target " + std::to_string(i) + " .\n";
    testing::write_file(dir / (id + ".src"), s);
    testing::write_file(dir / (id + ".tgt"), t);
  }
};

TEST_F(LoaderTest, ParallelFilesYieldPairs) {
  write_parallel("b1", 10, 10);
  testing::write_file(dir / "mono.txt", "Een zin .\n\nNog een .\n");
  testing::write_file(dir / "manifest.tsv",
                      "# id\tpaths\tlang\tprov\tsplit\n"
                      "b1\tb1.src,b1.tgt\tnl\tHT\ttrain\n"
                      "m1\tmono.txt\tnl\tOR\ttest\n");
  const auto c = load_corpus(dir / "manifest.tsv", dir.path());
  EXPECT_EQ(c.pairs.size(), 10u);
  EXPECT_EQ(c.pairs_in(Split::kTrain).size(), 10u);
  EXPECT_EQ(c.pairs_in(Split::kTest).size(), 0u);
  EXPECT_EQ(c.pairs_in(Split::kTrain, Provenance::kOriginal).size(), 0u);
  ASSERT_EQ(c.documents.size(), 2u);
  EXPECT_EQ(c.documents[1].provenance, Provenance::kOriginal);
  EXPECT_EQ(c.documents[1].sentences.size(), 2u);
  EXPECT_EQ(c.manifest.sentence_count(Split::kTrain), 10u);
  EXPECT_EQ(c.documents_in(Split::kTest).size(), 1u);
}

TEST_F(LoaderTest, LineCountMismatchNamesFilesAndCounts) {
  write_parallel("b1", 10, 9);
  testing::write_file(dir / "manifest.tsv", "b1\tb1.src,b1.tgt\tnl\tHT\ttrain\n");
  try {
    load_corpus(dir / "manifest.tsv", dir.path());
    FAIL() << "expected an alignment error";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("b1.src"), std::string::npos);
    EXPECT_NE(msg.find("b1.tgt"), std::string::npos);
    EXPECT_NE(msg.find("10"), std::string::npos);
    EXPECT_NE(msg.find("9"), std::string::npos);
  }
}

TEST_F(LoaderTest, UnknownProvenanceLabel) {
  write_parallel("b1", 3, 3);
  testing::write_file(dir / "manifest.tsv", "b1\tb1.src,b1.tgt\tnl\tXX\ttrain\n");
  try {
    load_corpus(dir / "manifest.tsv", dir.path());
    FAIL() << "expected a label error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("XX"), std::string::npos);
  }
}

TEST_F(LoaderTest, DuplicateIdsAndSplitDisjointness) {
  write_parallel("b1", 2, 2);
  testing::write_file(dir / "dup.tsv",
                      "b1\tb1.src,b1.tgt\tnl\tHT\ttrain\nb1\tb1.src,b1.tgt\tnl\tHT\ttest\n");
  EXPECT_THROW(parse_manifest(dir / "dup.tsv"), DataError);

  std::string m;
  for (int i = 0; i < 9; ++i)
    m += "d" + std::to_string(i) + "\tb1.tgt\tnl\tOR\t" +
         std::string(to_string(static_cast<Split>(i % 3))) + "\n";
  testing::write_file(dir / "many.tsv", m);
  const auto man = parse_manifest(dir / "many.tsv");
  std::map<std::string, int> seen;
  for (Split s : {Split::kTrain, Split::kValid, Split::kTest})
    for (const auto& id : man.ids(s)) ++seen[id];
  EXPECT_EQ(seen.size(), 9u);
  for (const auto& [id, n] : seen) EXPECT_EQ(n, 1) << id;
}

TEST_F(LoaderTest, EmptySideIsRejected) {
  testing::write_file(dir / "a.src", "x\n\n");
  testing::write_file(dir / "a.tgt", "y\nz\n");
  testing::write_file(dir / "manifest.tsv", "a\ta.src,a.tgt\tnl\tHT\ttrain\n");
  EXPECT_THROW(load_corpus(dir / "manifest.tsv", dir.path()), DataError);
}

Document pool(const std::string& id, Provenance p, int n) {
  Document d{id, "nl", p, {}};
  for (int i = 0; i < n; ++i) d.sentences.push_back(tokenize(id + " " + std::to_string(i)));
  return d;
}

TEST(ClassifierDataset, BalancesByDownsampling) {
  const auto set = make_classifier_dataset(
      Perspective::kHtOr, {pool("or", Provenance::kOriginal, 100), pool("ht", Provenance::kHuman, 150)}, 3);
  ASSERT_EQ(set.size(), 200u);
  int pos = 0;
  for (const auto& x : set) {
    pos += x.label;
    EXPECT_EQ(x.label == 1, x.book_id == "or");
  }
  EXPECT_EQ(pos, 100);
}

TEST(ClassifierDataset, MtOrPreferredIsOriginal) {
  const auto set = make_classifier_dataset(
      Perspective::kMtOr, {pool("mt", Provenance::kMachine, 50), pool("or", Provenance::kOriginal, 50),
                           pool("ht", Provenance::kHuman, 70)}, 3);
  ASSERT_EQ(set.size(), 100u);
  for (const auto& x : set) EXPECT_EQ(x.label == 1, x.book_id == "or");
}

TEST(ClassifierDataset, MtHtPreferredIsHuman) {
  const auto set = make_classifier_dataset(
      Perspective::kMtHt, {pool("mt", Provenance::kMachine, 30), pool("ht", Provenance::kHuman, 20)}, 3);
  ASSERT_EQ(set.size(), 40u);
  for (const auto& x : set) EXPECT_EQ(x.label == 1, x.book_id == "ht");
}

TEST(ClassifierDataset, MissingPoolNamesProvenance) {
  try {
    make_classifier_dataset(Perspective::kHtOr, {pool("ht", Provenance::kHuman, 10)}, 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("OR"), std::string::npos);
  }
}

TEST(ClassifierDataset, BalanceAndDeterminismProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = 1 + static_cast<int>(rng.index(40));
    const int b = 1 + static_cast<int>(rng.index(40));
    const std::vector<Document> pools = {pool("x", Provenance::kMachine, a), pool("y", Provenance::kHuman, b)};
    const auto s1 = make_classifier_dataset(Perspective::kMtHt, pools, trial);
    const auto s2 = make_classifier_dataset(Perspective::kMtHt, pools, trial);
    int pos = 0;
    for (const auto& x : s1) pos += x.label;
    ASSERT_EQ(pos * 2, static_cast<int>(s1.size()));
    ASSERT_EQ(static_cast<int>(s1.size()), 2 * std::min(a, b));
    for (std::size_t i = 0; i < s1.size(); ++i) ASSERT_EQ(s1[i].text, s2[i].text);
  }
}

}  // namespace
}  // namespace natalign

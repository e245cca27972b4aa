// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "natalign/core/random.hpp"
#include "natalign/evalreport/curves.hpp"
#include "natalign/evalreport/postprocess.hpp"
#include "natalign/evalreport/report.hpp"

namespace natalign {
namespace {

TEST(Postprocess, CollapsesRepeatedMarks) {
  const std::string ell = "\xE2\x80\xA6";
  EXPECT_EQ(postprocess_output(ell + "verlaten dingen............."), ell + "verlaten dingen.");
  EXPECT_EQ(postprocess_output("dingen............."), "dingen.");
  EXPECT_EQ(postprocess_output("Hello!!"), "Hello!");
  EXPECT_EQ(postprocess_output("a.b.c"), "a.b.c");
  EXPECT_EQ(postprocess_output("wacht" + ell + ell + ell), "wacht" + ell);
  EXPECT_EQ(postprocess_output("?!?!"), "?!?!");
  EXPECT_EQ(postprocess_output("aa  bb"), "aa  bb");
  EXPECT_EQ(postprocess_output(""), "");
}

TEST(Postprocess, TokenLevelMatchesRawLevel) {
  const auto s = sentence_from_tokens({"dingen", ".", ".", ".", "!", "!"});
  const auto p = postprocess_sentence(s);
  EXPECT_EQ(p.tokens, (std::vector<Token>{"dingen", ".", "!"}));
  EXPECT_EQ(p.raw, "dingen . !");
  const auto raw = tokenize("Ja...!! nee");
  EXPECT_EQ(postprocess_sentence(raw).raw, "Ja.! nee");
  EXPECT_EQ(postprocess_sentence(raw).tokens, tokenize("Ja.! nee").tokens);
}

// Drops every mark code point; what remains must be untouched.
std::string strip_marks(const std::string& s) {
  PostprocessOptions opt;
  std::string out;
  for (auto cp : utf8::code_points(s))
    if (!opt.collapses(cp)) out.append(cp);
  return out;
}

TEST(Postprocess, PropertiesOnRandomStrings) {
  const std::vector<std::string> alphabet = {"a", "b", " ", ".", ".", ",", "!", "?", "-", ";", ":",
                                             "\xE2\x80\xA6", "\xC3\xA9", "'", "\"", "("};
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> cps;
    for (std::size_t k = 0, n = rng.index(40); k < n; ++k) cps.push_back(alphabet[rng.index(alphabet.size())]);
    std::string s;
    for (const auto& c : cps) s += c;
    const std::string p = postprocess_output(s);
    ASSERT_EQ(postprocess_output(p), p) << s;
    ASSERT_EQ(strip_marks(p), strip_marks(s)) << s;
    // Oracle: keep a code point unless it is a mark equal to its predecessor.
    std::string expect;
    for (std::size_t k = 0; k < cps.size(); ++k)
      if (!(k > 0 && cps[k] == cps[k - 1] && PostprocessOptions{}.collapses(cps[k]))) expect += cps[k];
    ASSERT_EQ(p, expect) << s;
  }
}

struct Fixed : NaturalnessScorer {
  std::function<double(const Sentence&)> f;
  Perspective p;
  Fixed(Perspective persp, std::function<double(const Sentence&)> fn) : f(std::move(fn)), p(persp) {}
  double score(const Sentence& s) const override { return f(s); }
  Perspective perspective() const override { return p; }
};

Document book(const std::string& id, const std::vector<std::string>& lines) {
  Document d{id, "nl", Provenance::kMachine, {}};
  for (const auto& l : lines) d.sentences.push_back(tokenize(l));
  return d;
}

TEST(ClassificationRate, HandCountsAveragedPerBook) {
  // "mooi" marks sentences the scorer calls natural (t1 = HT for MT-HT).
  Fixed clf(Perspective::kMtHt, [](const Sentence& s) {
    return std::find(s.tokens.begin(), s.tokens.end(), "mooi") != s.tokens.end() ? 0.8 : 0.2;
  });
  SystemOutput out{"sys", {book("A", {"mooi zo", "zo", "mooi", "niets"}), book("B", {"mooi"})}, 1, ""};
  EXPECT_DOUBLE_EQ(classification_rate(clf, out, Provenance::kHuman), (50.0 + 100.0) / 2);
  EXPECT_DOUBLE_EQ(classification_rate(clf, out, Provenance::kMachine), (50.0 + 0.0) / 2);

  Fixed half(Perspective::kHtOr, [](const Sentence&) { return 0.5; });
  EXPECT_EQ(classification_rate(half, out, Provenance::kOriginal), 100.0);
  EXPECT_EQ(classification_rate(half, out, Provenance::kHuman), 0.0);
  Fixed always(Perspective::kMtOr, [](const Sentence&) { return 0.99; });
  EXPECT_EQ(classification_rate(always, out, Provenance::kOriginal), 100.0);
  EXPECT_THROW(classification_rate(clf, SystemOutput{"e", {}, 1, ""}, Provenance::kHuman), DataError);
}

std::vector<ParallelPair> refs() {
  return {{tokenize("a b"), tokenize("de kat zit op de mat ."), "A"},
          {tokenize("c d"), tokenize("de hond loopt naar huis ."), "A"},
          {tokenize("e f"), tokenize("het regent al de hele dag ."), "B"}};
}

TEST(Evaluate, IdentitySystemAndHumanRow) {
  ChrfScorer chrf;
  EvaluationResources res;
  res.content = &chrf;
  res.top_words = {"de", "."};
  SystemOutput ident{"identity", {}, 1, ""};
  for (const auto& p : refs()) {
    if (!ident.book(p.book_id)) ident.books.push_back({p.book_id, "", Provenance::kMachine, {}});
    for (auto& d : ident.books)
      if (d.id == p.book_id) d.sentences.push_back(p.target);
  }
  const auto rep = evaluate_system(ident, refs(), res);
  ASSERT_EQ(rep.rows.size(), 6u);  // HT: A, B, avg; identity: A, B, avg
  EXPECT_EQ(rep.rows[0].system, kHumanTranslation);
  for (const auto& r : rep.rows) {
    EXPECT_NEAR(r.bleu, 100.0, 1e-9);
    EXPECT_NEAR(r.content, 1.0, 1e-12);
  }
  const auto& a = rep.row("identity", "A");
  const auto& b = rep.row("identity", "B");
  const auto& avg = rep.row("identity", "avg");
  EXPECT_NEAR(avg.ttr, (a.ttr + b.ttr) / 2, 1e-9);
  EXPECT_NEAR(avg.mtld, (a.mtld + b.mtld) / 2, 1e-9);
  EXPECT_NEAR(avg.b1, (a.b1 + b.b1) / 2, 1e-9);
  EXPECT_NEAR(a.b1, 5.0 / 13.0, 1e-12);
  EXPECT_FALSE(avg.rates[0].has_value());
}

TEST(Evaluate, SingleBookRowEqualsAverage) {
  ChrfScorer chrf;
  EvaluationResources res;
  res.content = &chrf;
  Fixed clf(Perspective::kMtHt, [](const Sentence& s) { return s.size() > 6 ? 0.9 : 0.1; });
  res.classifiers[1] = &clf;
  auto r = refs();
  r.pop_back();
  SystemOutput sys{"s", {book("A", {"de kat zit op mat", "de hond loopt naar huis toe ."})}, 1, ""};
  const auto rep = evaluate_system(sys, r, res, false);
  ASSERT_EQ(rep.rows.size(), 2u);
  const auto& one = rep.rows[0];
  const auto& avg = rep.rows[1];
  EXPECT_EQ(one.bleu, avg.bleu);
  EXPECT_EQ(one.content, avg.content);
  EXPECT_EQ(one.rates[1], avg.rates[1]);
  EXPECT_EQ(*one.rates[1], 50.0);
  EXPECT_EQ(one.mtld, avg.mtld);
  EXPECT_EQ(one.yule, avg.yule);
}

TEST(Evaluate, MissingBookIsNamed) {
  EvaluationResources res;
  SystemOutput sys{"partial", {book("A", {"x", "y"})}, 1, ""};
  try {
    evaluate_system(sys, refs(), res);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'B'"), std::string::npos);
  }
  SystemOutput short_book{"short", {book("A", {"x"}), book("B", {"y"})}, 1, ""};
  EXPECT_THROW(evaluate_system(short_book, refs(), res), DataError);
}

TEST(Evaluate, TsvLayout) {
  ChrfScorer chrf;
  EvaluationResources res;
  res.content = &chrf;
  auto r = refs();
  r.resize(1);
  SystemOutput s1{"base", {book("A", {"de kat zit op de mat ."})}, 5, ""};
  SystemOutput s2{"aligned", {book("A", {"de kat zat op de mat !"})}, 5, ""};
  const auto rep = evaluate_systems({s1, s2}, r, res, false);
  std::ostringstream os;
  write_report_tsv(os, rep);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  EXPECT_EQ(header,
            "system\tbook\tBLEU\tchrF\tHT-OR\tMT-HT\tMT-OR\tTTR\tYule's I\tMTLD\t"
            "B1\xE2\x86\x93\tPTF\xE2\x86\x93\tCDU\xE2\x86\x93");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, line.find('\t', line.find('\t') + 1)), "base\tA");
  EXPECT_EQ(line.substr(0, 18), "base\tA\t100.00\t1.00");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Curves, HarmonicMeanAndFormat) {
  std::array<std::optional<double>, 3> rates = {std::nullopt, 0.6, std::nullopt};
  const auto c = make_curve_point(100, rates, 12.5, 0.8, Perspective::kMtHt);
  EXPECT_NEAR(c.hm, 2 / (1 / 0.6 + 1 / 0.8), 1e-12);
  EXPECT_NEAR(c.hm, 0.6857, 1e-4);
  rates[1] = 0.0;
  EXPECT_EQ(make_curve_point(0, rates, 1, 0.8, Perspective::kMtHt).hm, 0.0);

  std::ostringstream os;
  write_curves_tsv(os, {make_curve_point(0, {0.5, 0.25, std::nullopt}, 3.0, 0.9, Perspective::kHtOr)});
  EXPECT_EQ(os.str(),
            "step\tht_or\tmt_ht\tmt_or\tmtld\tcontent\thm\n"
            "0\t0.5000\t0.2500\tNA\t3.0000\t0.9000\t0.6429\n");
}

}  // namespace
}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "natalign/classifier/classifier.hpp"
#include "natalign/classifier/evaluation.hpp"
#include "natalign/core/error.hpp"
#include "natalign/evalreport/postprocess.hpp"
#include "natalign/metrics/bleu.hpp"
#include "natalign/metrics/lexical.hpp"
#include "natalign/metrics/translation_table.hpp"
#include "natalign/reward/content.hpp"

namespace natalign {

/// Translations of the test books by one system.
struct SystemOutput {
  std::string name;
  std::vector<Document> books;  // sentences aligned with the reference pairs
  int beam = 0;
  std::string checkpoint;

  const Document* book(const std::string& id) const {
    for (const auto& d : books)
      if (d.id == id) return &d;
    return nullptr;
  }
};

/// Provenance the scorer predicts for a sentence.
inline Provenance predicted_provenance(const NaturalnessScorer& clf, const Sentence& s,
                                       double threshold = 0.5) {
  return predict_label(clf.score(s), threshold) == 1 ? preferred(clf.perspective())
                                                     : dispreferred(clf.perspective());
}

/// Percentage of one book's sentences predicted as `target`.
inline double book_classification_rate(const NaturalnessScorer& clf, const Document& book,
                                       Provenance target, double threshold = 0.5) {
  if (book.sentences.empty()) throw DataError("classification rate: book '" + book.id + "' is empty");
  std::size_t hit = 0;
  for (const auto& s : book.sentences) hit += predicted_provenance(clf, s, threshold) == target;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(book.sentences.size());
}

/// Percentage of output sentences predicted as `target`, per book, then
/// averaged over books.
inline double classification_rate(const NaturalnessScorer& clf, const SystemOutput& out,
                                  Provenance target, double threshold = 0.5) {
  if (out.books.empty()) throw DataError("classification rate: system '" + out.name + "' has no output");
  double sum = 0.0;
  for (const auto& b : out.books) sum += book_classification_rate(clf, b, target, threshold);
  return sum / static_cast<double>(out.books.size());
}

/// One report row. Undefined values (Yule's I with all-distinct tokens, PTF
/// or CDU with no relevant source word, a missing classifier) stay empty and
/// print as NA.
struct MetricRow {
  std::string system;
  std::string book;
  double bleu = 0.0;
  double content = 0.0;
  std::array<std::optional<double>, 3> rates;  // HT-OR, MT-HT, MT-OR in percent
  double ttr = 0.0;
  std::optional<double> yule;
  double mtld = 0.0;
  double b1 = 0.0;
  std::optional<double> ptf;
  std::optional<double> cdu;
};

struct MetricReport {
  std::string content_metric = "chrF";
  std::vector<MetricRow> rows;

  const MetricRow& row(const std::string& system, const std::string& book) const {
    for (const auto& r : rows)
      if (r.system == system && r.book == book) return r;
    throw Error("report has no row for " + system + "/" + book);
  }
};

/// Everything evaluation needs besides the outputs themselves. Null
/// pointers leave the corresponding columns NA.
struct EvaluationResources {
  std::array<const NaturalnessScorer*, 3> classifiers{};  // indexed like kAllPerspectives
  const ContentScorer* content = nullptr;
  const LexicalTranslationTable* table = nullptr;
  std::unordered_set<Token> top_words;
  double mtld_threshold = 0.72;
  double classifier_threshold = 0.5;
  bool postprocess = true;  // false scores the raw decoder output
  PostprocessOptions postprocess_options;
};

inline constexpr const char* kHumanTranslation = "Human Translation";

namespace detail {

inline MetricRow evaluate_book(const std::string& system, const std::string& book_id,
                               const std::vector<Sentence>& hyps,
                               const std::vector<const ParallelPair*>& refs,
                               const EvaluationResources& res) {
  MetricRow row;
  row.system = system;
  row.book = book_id;
  std::vector<Sentence> ref_sents;
  std::vector<TokenPair> aligned;
  double content = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    ref_sents.push_back(refs[i]->target);
    aligned.push_back({refs[i]->source.tokens, hyps[i].tokens});
    if (res.content) content += res.content->score(refs[i]->source, refs[i]->target, hyps[i]);
  }
  row.bleu = bleu(hyps, ref_sents);
  row.content = res.content ? content / static_cast<double>(hyps.size()) : 0.0;

  Document doc{book_id, "", Provenance::kMachine, hyps};
  for (std::size_t p = 0; p < 3; ++p)
    if (const auto* clf = res.classifiers[p])
      row.rates[p] = book_classification_rate(*clf, doc, preferred(kAllPerspectives[p]),
                                              res.classifier_threshold);

  const TokenSeq text = flatten(hyps);
  if (text.empty()) throw DataError("system '" + system + "' produced no tokens for book '" + book_id + "'");
  row.ttr = ttr(text);
  row.yule = text.size() >= 2 ? yules_i(text) : std::nullopt;
  row.mtld = mtld(text, res.mtld_threshold);
  row.b1 = res.top_words.empty() ? 0.0 : b1(text, res.top_words);
  if (res.table && !option_usage(*res.table, aligned).empty()) {
    row.ptf = ptf(aligned, *res.table);
    row.cdu = cdu(aligned, *res.table);
  }
  return row;
}

inline std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& x : v)
    if (x) {
      s += *x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

/// Row whose every value is the mean of the given rows' values; optional
/// columns average over the books where they are defined.
inline MetricRow average_row(const std::string& system, const std::vector<MetricRow>& rows) {
  MetricRow a;
  a.system = system;
  a.book = "avg";
  const double n = static_cast<double>(rows.size());
  std::array<std::vector<std::optional<double>>, 3> rates;
  std::vector<std::optional<double>> yule, ptf_v, cdu_v;
  for (const auto& r : rows) {
    a.bleu += r.bleu / n;
    a.content += r.content / n;
    a.ttr += r.ttr / n;
    a.mtld += r.mtld / n;
    a.b1 += r.b1 / n;
    for (std::size_t p = 0; p < 3; ++p) rates[p].push_back(r.rates[p]);
    yule.push_back(r.yule);
    ptf_v.push_back(r.ptf);
    cdu_v.push_back(r.cdu);
  }
  for (std::size_t p = 0; p < 3; ++p) a.rates[p] = mean_defined(rates[p]);
  a.yule = mean_defined(yule);
  a.ptf = mean_defined(ptf_v);
  a.cdu = mean_defined(cdu_v);
  return a;
}

}  // namespace detail

/// Per-book and averaged metrics for each system over the reference pairs,
/// preceded by a Human Translation row set (the references scored as
/// output) when include_human is set. Books appear in reference order.
inline MetricReport evaluate_systems(const std::vector<SystemOutput>& systems,
                                     const std::vector<ParallelPair>& references,
                                     const EvaluationResources& res, bool include_human = true) {
  if (references.empty()) throw DataError("evaluate: no reference pairs");
  std::vector<std::string> book_order;
  std::map<std::string, std::vector<const ParallelPair*>> by_book;
  for (const auto& p : references) {
    auto& v = by_book[p.book_id];
    if (v.empty()) book_order.push_back(p.book_id);
    v.push_back(&p);
  }

  MetricReport report;
  if (res.content) report.content_metric = res.content->name();
  auto run = [&](const std::string& name, auto&& hyps_for) {
    std::vector<MetricRow> rows;
    for (const auto& id : book_order) {
      std::vector<Sentence> hyps = hyps_for(id);
      if (res.postprocess)
        for (auto& h : hyps) h = postprocess_sentence(h, res.postprocess_options);
      rows.push_back(detail::evaluate_book(name, id, hyps, by_book[id], res));
    }
    const MetricRow avg = detail::average_row(name, rows);
    for (auto& r : rows) report.rows.push_back(std::move(r));
    report.rows.push_back(avg);
  };

  if (include_human)
    run(kHumanTranslation, [&](const std::string& id) {
      std::vector<Sentence> out;
      for (const auto* p : by_book[id]) out.push_back(p->target);
      return out;
    });
  for (const auto& sys : systems)
    run(sys.name, [&](const std::string& id) {
      const Document* d = sys.book(id);
      if (!d) throw DataError("system '" + sys.name + "' is missing book '" + id + "'");
      if (d->sentences.size() != by_book[id].size())
        throw DataError("system '" + sys.name + "' book '" + id + "' has " +
                        std::to_string(d->sentences.size()) + " sentences, expected " +
                        std::to_string(by_book[id].size()));
      return d->sentences;
    });
  return report;
}

inline MetricReport evaluate_system(const SystemOutput& out, const std::vector<ParallelPair>& references,
                                    const EvaluationResources& res, bool include_human = true) {
  return evaluate_systems({out}, references, res, include_human);
}

namespace detail {

inline std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v, int decimals) {
  return v ? fmt(*v, decimals) : std::string("NA");
}

}  // namespace detail

/// Column order: accuracy, classification, diversity; lower-is-better
/// columns carry a down arrow.
inline std::vector<std::string> report_header(const MetricReport& r) {
  return {"system", "book",  "BLEU", r.content_metric, "HT-OR", "MT-HT", "MT-OR",
          "TTR",    "Yule's I", "MTLD", "B1\xE2\x86\x93", "PTF\xE2\x86\x93", "CDU\xE2\x86\x93"};
}

inline void write_report_tsv(std::ostream& os, const MetricReport& r) {
  const auto header = report_header(r);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "\t" : "") << header[i];
  os << '\n';
  using detail::fmt;
  for (const auto& row : r.rows) {
    os << row.system << '\t' << row.book << '\t' << fmt(row.bleu, 2) << '\t' << fmt(row.content, 4);
    for (const auto& rate : row.rates) os << '\t' << fmt(rate, 2);
    os << '\t' << fmt(row.ttr, 4) << '\t' << fmt(row.yule, 4) << '\t' << fmt(row.mtld, 2) << '\t'
       << fmt(row.b1, 4) << '\t' << fmt(row.ptf, 4) << '\t' << fmt(row.cdu, 4) << '\n';
  }
}

}  // namespace natalign

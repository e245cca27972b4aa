// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "natalign/align/select.hpp"
#include "natalign/evalreport/curves.hpp"
#include "natalign/evalreport/report.hpp"
#include "natalign/seq2seq/translate.hpp"

namespace natalign {

/// Beam-search translation of every source, grouped by book in first-seen
/// order. Sentences keep the raw decoder output.
template <typename T>
SystemOutput translate_system(const std::string& name, const Seq2Seq<T>& model,
                              const std::vector<ParallelPair>& pairs, int beam,
                              const std::string& checkpoint = "") {
  SystemOutput out{name, {}, beam, checkpoint};
  std::map<std::string, std::size_t> index;
  for (const auto& p : pairs) {
    auto [it, inserted] = index.emplace(p.book_id, out.books.size());
    if (inserted) out.books.push_back({p.book_id, "", Provenance::kMachine, {}});
    out.books[it->second].sentences.push_back(decode_beam(model, p.source, beam).sentence);
  }
  return out;
}

/// Validation numbers for one checkpoint: classification rates and content
/// as fractions, MTLD over all outputs.
template <typename T>
CurvePoint evaluate_checkpoint(long step, const Seq2Seq<T>& model, const std::vector<ParallelPair>& valid,
                               const EvaluationResources& res, Perspective target, int beam = 1) {
  const auto out = translate_system("checkpoint", model, valid, beam);
  const auto report = evaluate_system(out, valid, res, false);
  const MetricRow& avg = report.rows.back();
  std::vector<Sentence> all;
  for (const auto& b : out.books)
    for (const auto& s : b.sentences)
      all.push_back(res.postprocess ? postprocess_sentence(s, res.postprocess_options) : s);
  std::array<std::optional<double>, 3> rates;
  for (std::size_t p = 0; p < 3; ++p)
    if (avg.rates[p]) rates[p] = *avg.rates[p] / 100.0;
  const TokenSeq text = flatten(all);
  return make_curve_point(step, rates, text.empty() ? 0.0 : mtld(text, res.mtld_threshold),
                          avg.content, target);
}

inline CheckpointEval to_checkpoint_eval(const CurvePoint& c, Perspective target) {
  const auto& r = c.rates[perspective_index(target)];
  return {c.step, r ? *r : 0.0, c.content};
}

}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "natalign/classifier/classifier.hpp"
#include "natalign/core/error.hpp"
#include "natalign/seq2seq/translate.hpp"

namespace natalign {

struct RerankCandidate {
  Sentence sentence;
  std::vector<int> ids;
  double naturalness = 0.0;
  double log_prob = 0.0;
};

/// Highest classifier score wins; equal scores go to the higher model
/// log-probability, then to the earlier candidate.
inline std::size_t pick_candidate(const std::vector<RerankCandidate>& c) {
  if (c.empty()) throw Error("pick_candidate: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const auto& a = c[i];
    const auto& b = c[best];
    if (a.naturalness > b.naturalness || (a.naturalness == b.naturalness && a.log_prob > b.log_prob))
      best = i;
  }
  return best;
}

struct RerankOptions {
  int candidates = 8;
  int top_k = 10;  // per-step sampling restriction
  double temperature = 1.0;
};

/// Draws `candidates` top-k samples and keeps the one the classifier finds
/// most natural.
template <typename T>
RerankCandidate rerank_topk(const Seq2Seq<T>& model, const Sentence& x, const NaturalnessScorer& clf,
                            Rng& rng, const RerankOptions& opt = {}) {
  if (opt.candidates < 1) throw ConfigError("rerank.candidates", "must be >= 1");
  if (opt.top_k < 0) throw ConfigError("rerank.top_k", "must be >= 0");
  std::vector<RerankCandidate> cands;
  for (int i = 0; i < opt.candidates; ++i) {
    auto s = sample_translation(model, x, opt.temperature, rng, opt.top_k);
    double lp = 0.0;
    for (double v : s.token_log_probs) lp += v;
    const double p = clf.score(s.sentence);
    cands.push_back({std::move(s.sentence), std::move(s.ids), p, lp});
  }
  return cands[pick_candidate(cands)];
}

}  // namespace natalign

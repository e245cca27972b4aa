// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

struct BleuStats {
  std::vector<long> matches = std::vector<long>(4, 0);
  std::vector<long> totals = std::vector<long>(4, 0);
  long hyp_len = 0;
  long ref_len = 0;
};

inline BleuStats bleu_stats(const std::vector<std::vector<Token>>& hyps,
                            const std::vector<std::vector<Token>>& refs, int max_order = 4) {
  if (hyps.size() != refs.size())
    throw Error("bleu: " + std::to_string(hyps.size()) + " hypotheses for " +
                std::to_string(refs.size()) + " references");
  BleuStats st;
  st.matches.assign(static_cast<std::size_t>(max_order), 0);
  st.totals.assign(static_cast<std::size_t>(max_order), 0);
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    const auto& h = hyps[k];
    const auto& r = refs[k];
    st.hyp_len += static_cast<long>(h.size());
    st.ref_len += static_cast<long>(r.size());
    for (int n = 1; n <= max_order; ++n) {
      const auto un = static_cast<std::size_t>(n);
      std::map<std::vector<Token>, long> rc;
      for (std::size_t i = 0; i + un <= r.size(); ++i) ++rc[{r.begin() + static_cast<long>(i), r.begin() + static_cast<long>(i + un)}];
      std::map<std::vector<Token>, long> hc;
      for (std::size_t i = 0; i + un <= h.size(); ++i) ++hc[{h.begin() + static_cast<long>(i), h.begin() + static_cast<long>(i + un)}];
      for (const auto& [g, c] : hc) {
        st.totals[un - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) st.matches[un - 1] += std::min(c, it->second);
      }
    }
  }
  return st;
}

/// Corpus BLEU on a 0-100 scale. Orders with no hypothesis n-grams at all are
/// left out of the geometric mean (effective order); an order with n-grams
/// but zero matches uses epsilon / total in place of its precision.
inline double bleu_from_stats(const BleuStats& st, double epsilon = 0.1) {
  if (st.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 0; n < st.totals.size(); ++n) {
    if (st.totals[n] == 0) continue;
    const double num = st.matches[n] > 0 ? static_cast<double>(st.matches[n]) : epsilon;
    log_sum += std::log(num / static_cast<double>(st.totals[n]));
    ++orders;
  }
  const double bp = st.hyp_len >= st.ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(st.ref_len) / static_cast<double>(st.hyp_len));
  return 100.0 * bp * std::exp(log_sum / orders);
}

inline double bleu(const std::vector<std::vector<Token>>& hyps, const std::vector<std::vector<Token>>& refs) {
  return bleu_from_stats(bleu_stats(hyps, refs));
}

inline double bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
  std::vector<std::vector<Token>> h, r;
  for (const auto& s : hyps) h.push_back(s.tokens);
  for (const auto& s : refs) r.push_back(s.tokens);
  return bleu(h, r);
}

}  // namespace natalign

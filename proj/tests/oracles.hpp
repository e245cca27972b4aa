// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Naive reference implementations of the metrics, shared by the unit tests
// and the acceptance run. Deliberately quadratic and free of hashing
// containers.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "natalign/metrics/lexical.hpp"
#include "natalign/metrics/translation_table.hpp"

namespace natalign::oracle {

inline std::vector<std::pair<Token, int>> naive_freq(const TokenSeq& t) {
  std::vector<std::pair<Token, int>> f;
  for (const auto& w : t) {
    bool found = false;
    for (auto& [k, c] : f)
      if (k == w) {
        ++c;
        found = true;
      }
    if (!found) f.emplace_back(w, 1);
  }
  return f;
}

inline double naive_ttr(const TokenSeq& t) { return double(naive_freq(t).size()) / double(t.size()); }

inline double naive_yule_denominator(const TokenSeq& t, double* v_out) {
  const auto f = naive_freq(t);
  const double v = double(f.size());
  double sum = 0;
  for (std::size_t i = 1; i <= t.size(); ++i) {
    int types_with_i = 0;
    for (const auto& [k, c] : f) types_with_i += c == int(i);
    sum += double(i) * double(i) * types_with_i;
  }
  *v_out = v;
  return sum - v;
}

inline double naive_mtld_pass(const TokenSeq& t, double thr) {
  double factors = 0;
  TokenSeq seg;
  for (const auto& w : t) {
    seg.push_back(w);
    if (naive_ttr(seg) < thr) {
      factors += 1;
      seg.clear();
    }
  }
  if (!seg.empty()) factors += (1 - naive_ttr(seg)) / (1 - thr);
  return factors == 0 ? double(t.size()) : double(t.size()) / factors;
}

inline double naive_mtld(const TokenSeq& t, double thr = 0.72) {
  TokenSeq rev(t.rbegin(), t.rend());
  return (naive_mtld_pass(t, thr) + naive_mtld_pass(rev, thr)) / 2;
}

inline double naive_b1(const TokenSeq& t, const std::vector<Token>& top) {
  int hit = 0;
  for (const auto& w : t)
    for (const auto& x : top)
      if (x == w) {
        ++hit;
        break;
      }
  return double(hit) / double(t.size());
}

inline std::vector<std::string> joined_ngrams(const TokenSeq& t, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    std::string g;
    for (std::size_t k = 0; k < n; ++k) g += t[i + k] + "\x01";
    out.push_back(g);
  }
  return out;
}

inline double naive_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs) {
  double match[4] = {0, 0, 0, 0}, total[4] = {0, 0, 0, 0}, c = 0, r = 0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    c += double(hyps[k].size());
    r += double(refs[k].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      auto hg = joined_ngrams(hyps[k], n);
      auto rg = joined_ngrams(refs[k], n);
      total[n - 1] += double(hg.size());
      // Greedy one-to-one matching is exactly count clipping.
      std::vector<bool> used(rg.size(), false);
      for (const auto& g : hg)
        for (std::size_t j = 0; j < rg.size(); ++j)
          if (!used[j] && rg[j] == g) {
            used[j] = true;
            match[n - 1] += 1;
            break;
          }
    }
  }
  if (c == 0) return 0;
  double logp = 0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (total[n] == 0) continue;
    logp += std::log((match[n] > 0 ? match[n] : 0.1) / total[n]);
    ++orders;
  }
  const double bp = c >= r ? 1.0 : std::exp(1 - r / c);
  return 100 * bp * std::exp(logp / orders);
}

// Oracle for the option-usage metrics written straight from the definitions.
inline std::pair<double, double> naive_ptf_cdu(const LexicalTranslationTable& t, const std::vector<TokenPair>& outs) {
  std::vector<Token> words_seen;
  std::vector<std::vector<double>> vectors;
  std::vector<double> top_rate;
  for (const auto& [s, opts] : t.options) {
    if (!t.relevant(s)) continue;
    std::vector<Token> names;
    for (const auto& [w, c] : opts) names.push_back(w);
    std::vector<double> counts(names.size(), 0);
    double seen = 0;
    for (const auto& p : outs)
      for (const auto& src : p.source) {
        if (src != s) continue;
        int pick = -1;
        double best = -1;
        for (const auto& w : p.target)
          for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == w) {
              const double pr = t.t(w, s);
              if (pr > best || (pr == best && w < names[static_cast<std::size_t>(pick)])) {
                best = pr;
                pick = int(k);
              }
            }
        if (pick >= 0) {
          counts[static_cast<std::size_t>(pick)] += 1;
          seen += 1;
        }
      }
    if (seen == 0) continue;
    std::size_t top = 0;
    long top_c = -1;
    std::size_t k = 0;
    for (const auto& [w, c] : opts) {
      if (c > top_c) {
        top_c = c;
        top = k;
      }
      ++k;
    }
    top_rate.push_back(counts[top] / seen);
    double dot = 0, nn = 0;
    for (double c : counts) {
      dot += c;
      nn += c * c;
    }
    vectors.push_back({dot / (std::sqrt(nn) * std::sqrt(double(counts.size())))});
  }
  double p = 0, c = 0;
  for (double v : top_rate) p += v;
  for (const auto& v : vectors) c += v[0];
  return {p / double(top_rate.size()), c / double(vectors.size())};
}

}  // namespace natalign::oracle

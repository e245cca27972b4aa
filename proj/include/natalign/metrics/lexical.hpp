// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

using TokenSeq = std::vector<Token>;

inline TokenSeq flatten(const std::vector<Sentence>& sentences) {
  TokenSeq out;
  for (const auto& s : sentences) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

/// Type-token ratio.
inline double ttr(const TokenSeq& text) {
  if (text.empty()) throw Error("ttr: empty text");
  const std::unordered_set<Token> types(text.begin(), text.end());
  return static_cast<double>(types.size()) / static_cast<double>(text.size());
}

/// Yule's I = V^2 / (sum_i i^2 f(i) - V), V the number of types and f(i) the
/// number of types seen exactly i times. Undefined (nullopt) when every token
/// is distinct and the denominator vanishes.
inline std::optional<double> yules_i(const TokenSeq& text) {
  if (text.size() < 2) throw Error("yules_i: need at least two tokens");
  std::unordered_map<Token, long> freq;
  for (const auto& t : text) ++freq[t];
  std::map<long, long> spectrum;
  for (const auto& [t, c] : freq) ++spectrum[c];
  const double v = static_cast<double>(freq.size());
  double m2 = 0.0;
  for (const auto& [i, f] : spectrum) m2 += static_cast<double>(i) * static_cast<double>(i) * static_cast<double>(f);
  const double denom = m2 - v;
  if (denom == 0.0) return std::nullopt;
  return v * v / denom;
}

namespace detail {

// One MTLD pass: factor count including the final partial factor.
template <typename It>
double mtld_factors(It begin, It end, double threshold) {
  double factors = 0.0;
  std::unordered_set<Token> types;
  std::size_t tokens = 0;
  for (It it = begin; it != end; ++it) {
    types.insert(*it);
    ++tokens;
    const double ratio = static_cast<double>(types.size()) / static_cast<double>(tokens);
    if (ratio < threshold) {
      factors += 1.0;
      types.clear();
      tokens = 0;
    }
  }
  if (tokens > 0) {
    const double ratio = static_cast<double>(types.size()) / static_cast<double>(tokens);
    factors += (1.0 - ratio) / (1.0 - threshold);
  }
  return factors;
}

}  // namespace detail

/// MTLD: mean of forward and backward N / factors. A pass with zero factors
/// is clamped to N.
inline double mtld(const TokenSeq& text, double threshold = 0.72) {
  if (text.empty()) throw Error("mtld: empty text");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("metrics.mtld_threshold", "must be in (0, 1)");
  const double n = static_cast<double>(text.size());
  auto value = [n](double f) { return f > 0.0 ? n / f : n; };
  const double fwd = value(detail::mtld_factors(text.begin(), text.end(), threshold));
  const double bwd = value(detail::mtld_factors(text.rbegin(), text.rend(), threshold));
  return 0.5 * (fwd + bwd);
}

/// Share of tokens that belong to the frequent-word list (lower is richer).
inline double b1(const TokenSeq& text, const std::unordered_set<Token>& top_words) {
  if (text.empty()) throw Error("b1: empty text");
  if (top_words.empty()) throw Error("b1: empty frequent-word list");
  std::size_t hits = 0;
  for (const auto& t : text) hits += top_words.count(t);
  return static_cast<double>(hits) / static_cast<double>(text.size());
}

/// The k most frequent tokens, ties broken lexicographically.
inline std::vector<Token> top_k_words(const TokenSeq& corpus, std::size_t k = 1000) {
  std::map<Token, long> freq;
  for (const auto& t : corpus) ++freq[t];
  std::vector<std::pair<Token, long>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<Token> out;
  for (std::size_t i = 0; i < items.size() && i < k; ++i) out.push_back(items[i].first);
  return out;
}

}  // namespace natalign

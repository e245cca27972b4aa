// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/hash.hpp"
#include "natalign/core/utf8.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

struct FeatureSpec {
  int min_order = 1;
  int max_order = 4;
  bool word_unigrams = true;
  int hash_bits = 18;
  bool lowercase = true;

  std::size_t dimension() const { return std::size_t{1} << hash_bits; }

  void validate() const {
    if (min_order < 1 || max_order < min_order)
      throw ConfigError("classifier.orders", "need 1 <= min_order <= max_order");
    if (hash_bits < 1 || hash_bits > 30) throw ConfigError("classifier.hash_bits", "must be in [1, 30]");
  }

  bool operator==(const FeatureSpec&) const = default;
};

/// Sorted (index, value) pairs with unique indices.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

namespace detail {
// Word features live in their own hash stream so the word "ab" and the
// character bigram "ab" land on different buckets.
inline constexpr std::uint64_t kWordSeed = fnv1a("word\x1f");
}  // namespace detail

inline std::uint32_t char_ngram_bucket(std::string_view gram, const FeatureSpec& spec) {
  return static_cast<std::uint32_t>(fnv1a(gram) & (spec.dimension() - 1));
}

inline std::uint32_t word_bucket(std::string_view word, const FeatureSpec& spec) {
  return static_cast<std::uint32_t>(fnv1a(word, detail::kWordSeed) & (spec.dimension() - 1));
}

/// Hashed character n-gram counts over the (lowercased) raw string plus word
/// unigram counts, L2-normalized.
inline SparseVector featurize(const Sentence& s, const FeatureSpec& spec) {
  const std::string text = spec.lowercase ? utf8::to_lower(s.raw) : s.raw;
  const auto cps = utf8::code_points(text);
  std::vector<std::uint32_t> hits;
  for (int n = spec.min_order; n <= spec.max_order; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= cps.size(); ++i) {
      const char* begin = cps[i].data();
      const char* end = cps[i + un - 1].data() + cps[i + un - 1].size();
      hits.push_back(char_ngram_bucket(std::string_view(begin, static_cast<std::size_t>(end - begin)), spec));
    }
  }
  if (spec.word_unigrams)
    for (const auto& t : s.tokens) hits.push_back(word_bucket(spec.lowercase ? utf8::to_lower(t) : t, spec));

  std::sort(hits.begin(), hits.end());
  SparseVector v;
  for (std::uint32_t h : hits) {
    if (!v.empty() && v.back().first == h)
      v.back().second += 1.0;
    else
      v.emplace_back(h, 1.0);
  }
  double norm = 0.0;
  for (const auto& [i, x] : v) norm += x * x;
  norm = std::sqrt(norm);
  for (auto& [i, x] : v) x /= norm;
  return v;
}

}  // namespace natalign

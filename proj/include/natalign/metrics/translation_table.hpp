// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Lexical translation options per source word, extracted with an IBM-1 style
// EM aligner, and the two option-diversity metrics built on them.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

struct TableOptions {
  int iters = 5;
  double posterior_floor = 0.1;
  int min_source_freq = 10;
  int min_options = 2;

  void validate() const {
    if (iters < 0) throw ConfigError("metrics.table_iters", "must be >= 0");
    if (!(posterior_floor >= 0.0 && posterior_floor <= 1.0))
      throw ConfigError("metrics.posterior_floor", "must be in [0, 1]");
    if (min_source_freq < 1) throw ConfigError("metrics.min_source_freq", "must be >= 1");
    if (min_options < 1) throw ConfigError("metrics.min_options", "must be >= 1");
  }
};

/// A sentence pair as two token sequences.
struct TokenPair {
  std::vector<Token> source;
  std::vector<Token> target;
};

inline std::vector<TokenPair> token_pairs(const std::vector<ParallelPair>& pairs) {
  std::vector<TokenPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.source.tokens, p.target.tokens});
  return out;
}

class LexicalTranslationTable {
 public:
  using Options = std::map<Token, long>;

  TableOptions options_used;
  /// t(target | source) after EM.
  std::map<Token, std::map<Token, double>> prob;
  /// Aligned option counts per source word.
  std::map<Token, Options> options;
  std::map<Token, long> source_freq;

  bool relevant(const Token& s) const {
    auto f = source_freq.find(s);
    auto o = options.find(s);
    return f != source_freq.end() && o != options.end() && f->second >= options_used.min_source_freq &&
           static_cast<int>(o->second.size()) >= options_used.min_options;
  }

  std::vector<Token> relevant_words() const {
    std::vector<Token> out;
    for (const auto& [s, o] : options)
      if (relevant(s)) out.push_back(s);
    return out;
  }

  /// Most frequent option; ties go to the lexicographically smallest.
  const Token& top_option(const Token& s) const {
    const auto& o = options.at(s);
    auto best = o.begin();
    for (auto it = o.begin(); it != o.end(); ++it)
      if (it->second > best->second) best = it;
    return best->first;
  }

  double t(const Token& target, const Token& source) const {
    auto it = prob.find(source);
    if (it == prob.end()) return 0.0;
    auto jt = it->second.find(target);
    return jt == it->second.end() ? 0.0 : jt->second;
  }
};

/// IBM-1 EM from a uniform start. After `iters` rounds every (source,
/// target) position pair whose alignment posterior is at least the floor adds
/// one count to that source word's options. With iters = 0 the posterior is
/// uniform over the source sentence, so short sentences yield plain
/// co-occurrence counts.
inline LexicalTranslationTable build_translation_table(const std::vector<TokenPair>& corpus,
                                                       const TableOptions& opt = {}) {
  opt.validate();
  if (corpus.empty()) throw Error("build_translation_table: empty corpus");
  LexicalTranslationTable table;
  table.options_used = opt;

  std::map<Token, int> target_types;
  for (const auto& p : corpus) {
    for (const auto& s : p.source) ++table.source_freq[s];
    for (const auto& w : p.target) target_types[w];
  }
  const double uniform = 1.0 / static_cast<double>(std::max<std::size_t>(target_types.size(), 1));
  for (const auto& p : corpus)
    for (const auto& s : p.source)
      for (const auto& w : p.target) table.prob[s][w] = uniform;

  for (int it = 0; it < opt.iters; ++it) {
    std::map<Token, std::map<Token, double>> counts;
    std::map<Token, double> totals;
    for (const auto& p : corpus) {
      for (const auto& w : p.target) {
        double denom = 0.0;
        for (const auto& s : p.source) denom += table.prob[s][w];
        if (denom <= 0.0) continue;
        for (const auto& s : p.source) {
          const double post = table.prob[s][w] / denom;
          counts[s][w] += post;
          totals[s] += post;
        }
      }
    }
    for (auto& [s, row] : table.prob)
      for (auto& [w, v] : row) {
        const double tot = totals[s];
        v = tot > 0.0 ? counts[s][w] / tot : 0.0;
      }
  }

  for (const auto& p : corpus) {
    for (const auto& w : p.target) {
      double denom = 0.0;
      for (const auto& s : p.source) denom += table.t(w, s);
      if (denom <= 0.0) continue;
      for (const auto& s : p.source)
        if (table.t(w, s) / denom >= opt.posterior_floor) ++table.options[s][w];
    }
  }
  return table;
}

/// Per relevant source word, how often each of its options was chosen in the
/// outputs. The chosen option for one occurrence is the output word with the
/// highest t(w | s) among the word's options; occurrences whose output
/// contains none of the options are skipped.
inline std::map<Token, std::map<Token, long>> option_usage(const LexicalTranslationTable& table,
                                                           const std::vector<TokenPair>& outputs) {
  std::map<Token, std::map<Token, long>> usage;
  for (const auto& p : outputs) {
    for (const auto& s : p.source) {
      if (!table.relevant(s)) continue;
      const auto& opts = table.options.at(s);
      const Token* best = nullptr;
      double best_t = -1.0;
      for (const auto& w : p.target) {
        if (!opts.count(w)) continue;
        const double t = table.t(w, s);
        if (t > best_t || (t == best_t && w < *best)) {
          best_t = t;
          best = &w;
        }
      }
      if (best) ++usage[s][*best];
    }
  }
  return usage;
}

/// Mean rate at which a relevant word is rendered by its most frequent
/// option (lower means more varied).
inline double ptf(const std::vector<TokenPair>& outputs, const LexicalTranslationTable& table) {
  const auto usage = option_usage(table, outputs);
  if (usage.empty()) throw Error("ptf: no relevant source word observed in the outputs");
  double sum = 0.0;
  for (const auto& [s, used] : usage) {
    long total = 0;
    for (const auto& [w, c] : used) total += c;
    auto it = used.find(table.top_option(s));
    sum += it == used.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
  }
  return sum / static_cast<double>(usage.size());
}

/// Cosine between an option-count vector and the all-ones vector.
inline double uniform_cosine(const std::vector<double>& counts) {
  double s = 0.0, sq = 0.0;
  for (double c : counts) {
    s += c;
    sq += c * c;
  }
  if (sq == 0.0) return 0.0;
  return s / (std::sqrt(sq) * std::sqrt(static_cast<double>(counts.size())));
}

/// Mean cosine similarity between each relevant word's output option counts
/// (over all of its table options) and the uniform vector.
inline double cdu(const std::vector<TokenPair>& outputs, const LexicalTranslationTable& table) {
  const auto usage = option_usage(table, outputs);
  if (usage.empty()) throw Error("cdu: no relevant source word observed in the outputs");
  double sum = 0.0;
  for (const auto& [s, used] : usage) {
    std::vector<double> v;
    for (const auto& [w, c] : table.options.at(s)) {
      auto it = used.find(w);
      v.push_back(it == used.end() ? 0.0 : static_cast<double>(it->second));
    }
    sum += uniform_cosine(v);
  }
  return sum / static_cast<double>(usage.size());
}

}  // namespace natalign

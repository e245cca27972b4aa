// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Small generated translation tasks with known structure, for end-to-end
// checks that run in minutes on a CPU.

#include <algorithm>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"
#include "natalign/corpus/tokenizer.hpp"
#include "natalign/corpus/types.hpp"
#include "natalign/corpus/vocabulary.hpp"
#include "natalign/seq2seq/inference.hpp"
#include "natalign/seq2seq/search.hpp"

namespace natalign::synthetic {

// ---------------------------------------------------------------------------
// Copy translation: s<i> ... -> t<i> ...

struct CopyTaskOptions {
  int symbols = 20;
  int min_len = 3;
  int max_len = 8;
  int train = 2000;
  int valid = 200;
  std::uint64_t seed = 1;
};

struct CopyTask {
  std::vector<ParallelPair> train, valid;
  Vocabulary source_vocab, target_vocab;
};

inline CopyTask make_copy_task(const CopyTaskOptions& opt = {}) {
  if (opt.symbols < 1 || opt.min_len < 1 || opt.max_len < opt.min_len)
    throw ConfigError("synthetic.copy", "need symbols >= 1 and 1 <= min_len <= max_len");
  CopyTask task;
  for (int i = 0; i < opt.symbols; ++i) {
    task.source_vocab.add("s" + std::to_string(i));
    task.target_vocab.add("t" + std::to_string(i));
  }
  Rng rng(opt.seed);
  auto make = [&](int n, std::vector<ParallelPair>& out) {
    for (int k = 0; k < n; ++k) {
      const int len = opt.min_len + static_cast<int>(rng.index(static_cast<std::size_t>(opt.max_len - opt.min_len + 1)));
      std::vector<Token> src, tgt;
      for (int j = 0; j < len; ++j) {
        const auto s = std::to_string(rng.index(static_cast<std::size_t>(opt.symbols)));
        src.push_back("s" + s);
        tgt.push_back("t" + s);
      }
      out.push_back({sentence_from_tokens(src), sentence_from_tokens(tgt), "copy"});
    }
  };
  make(opt.train, task.train);
  make(opt.valid, task.valid);
  return task;
}

/// Position-wise agreement of greedy output with the reference; the longer
/// of the two sets the denominator, so missing or extra tokens count as
/// errors. Pooled over all pairs.
template <typename T>
double greedy_token_accuracy(const Seq2Seq<T>& model, const std::vector<ParallelPair>& pairs) {
  std::size_t correct = 0, total = 0;
  for (const auto& p : pairs) {
    IncrementalDecoder<T> dec(model, model.encode_source(p.source));
    const auto out = greedy_decode(dec);
    const auto ref = model.encode_target(p.target);
    for (std::size_t i = 0; i < std::min(ref.size(), out.tokens.size()); ++i) correct += ref[i] == out.tokens[i];
    total += std::max(ref.size(), out.tokens.size());
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

// ---------------------------------------------------------------------------
// Register task: every source has a bland and a natural rendering that differ
// only in a closing particle. Bland output always ends in one particle;
// natural output picks one of several, determined by the first source symbol.

enum class Register { kBland, kNatural };

struct StyleTaskOptions {
  int symbols = 12;
  int min_len = 4;
  int max_len = 7;
  int books = 4;
  double base_natural_share = 0.1;  // base training and alignment data
  double eval_natural_share = 0.5;  // validation and test references
  int base_train = 3000;
  int align = 1000;
  int classifier = 600;  // sources whose natural rendering is the HT pool
  int classifier_test = 200;
  int valid = 200;
  int test = 200;
  std::uint64_t seed = 1;
};

struct StyleTask {
  std::vector<std::string> lexicon;  // target word for each source symbol
  std::string bland_marker = "zo";
  std::vector<std::string> natural_markers = {"echt", "juist", "zelfs", "toch"};

  std::vector<ParallelPair> base_train, align, valid, test;
  /// Pairs whose target is the natural rendering; their sources also feed
  /// the MT side of the classifier data.
  std::vector<ParallelPair> classifier_pairs, classifier_test_pairs;
  Vocabulary source_vocab, target_vocab;

  Sentence render(const std::vector<int>& src, Register reg) const {
    std::vector<Token> out;
    for (int s : src) out.push_back(lexicon[static_cast<std::size_t>(s)]);
    out.push_back(reg == Register::kBland ? bland_marker
                                          : natural_markers[static_cast<std::size_t>(src.front()) %
                                                            natural_markers.size()]);
    return sentence_from_tokens(out);
  }

  /// Natural when the sentence carries any natural marker and no bland one.
  bool is_natural(const Sentence& s) const {
    bool natural = false;
    for (const auto& t : s.tokens) {
      if (t == bland_marker) return false;
      natural = natural || std::find(natural_markers.begin(), natural_markers.end(), t) != natural_markers.end();
    }
    return natural;
  }
};

inline StyleTask make_style_task(const StyleTaskOptions& opt = {}) {
  if (opt.symbols < 4 || opt.min_len < 1 || opt.max_len < opt.min_len || opt.books < 1)
    throw ConfigError("synthetic.style", "need symbols >= 4, 1 <= min_len <= max_len, books >= 1");
  StyleTask task;
  Rng rng(opt.seed);
  const std::string consonants = "bdfgklmnprstvw", vowels = "aeiou";
  while (static_cast<int>(task.lexicon.size()) < opt.symbols) {
    std::string w;
    const std::size_t len = 4 + rng.index(3);
    for (std::size_t i = 0; i < len; ++i)
      w += i % 2 ? vowels[rng.index(vowels.size())] : consonants[rng.index(consonants.size())];
    if (std::find(task.lexicon.begin(), task.lexicon.end(), w) == task.lexicon.end()) task.lexicon.push_back(w);
  }
  for (int i = 0; i < opt.symbols; ++i) task.source_vocab.add("s" + std::to_string(i));
  for (const auto& w : task.lexicon) task.target_vocab.add(w);
  task.target_vocab.add(task.bland_marker);
  for (const auto& m : task.natural_markers) task.target_vocab.add(m);

  auto source = [&] {
    const int len = opt.min_len + static_cast<int>(rng.index(static_cast<std::size_t>(opt.max_len - opt.min_len + 1)));
    std::vector<int> s;
    for (int j = 0; j < len; ++j) s.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(opt.symbols))));
    return s;
  };
  auto to_sentence = [](const std::vector<int>& ids) {
    std::vector<Token> t;
    for (int i : ids) t.push_back("s" + std::to_string(i));
    return sentence_from_tokens(t);
  };
  auto make = [&](int n, double natural_share, std::vector<ParallelPair>& out, bool exact_share) {
    for (int k = 0; k < n; ++k) {
      const auto src = source();
      // Evaluation sets alternate registers so the share is exact.
      const bool natural = exact_share ? (k % 2 == 1) : rng.bernoulli(natural_share);
      out.push_back({to_sentence(src), task.render(src, natural ? Register::kNatural : Register::kBland),
                     "book" + std::to_string(k % opt.books)});
    }
  };
  make(opt.base_train, opt.base_natural_share, task.base_train, false);
  make(opt.align, opt.base_natural_share, task.align, false);
  make(opt.classifier, 1.0, task.classifier_pairs, false);
  make(opt.classifier_test, 1.0, task.classifier_test_pairs, false);
  const bool half = opt.eval_natural_share == 0.5;
  make(opt.valid, opt.eval_natural_share, task.valid, half);
  make(opt.test, opt.eval_natural_share, task.test, half);
  return task;
}

}  // namespace natalign::synthetic

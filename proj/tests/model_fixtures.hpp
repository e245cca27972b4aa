// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "natalign/core/random.hpp"
#include "natalign/corpus/tokenizer.hpp"
#include "natalign/corpus/vocabulary.hpp"
#include "natalign/seq2seq/model.hpp"

namespace natalign::testing {

inline Vocabulary symbol_vocab(int n, const std::string& prefix = "s") {
  Vocabulary v;
  for (int i = 0; i < n; ++i) v.add(prefix + std::to_string(i));
  return v;
}

/// Small enough for finite-difference checks (about 2k parameters).
inline ModelConfig tiny_config() {
  ModelConfig c;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.width = 8;
  c.heads = 2;
  c.ff_width = 16;
  c.max_len = 24;
  return c;
}

template <typename T>
Seq2Seq<T> tiny_model(std::uint64_t seed, int symbols = 6) {
  return Seq2Seq<T>(tiny_config(), symbol_vocab(symbols), symbol_vocab(symbols, "t"), seed);
}

/// Random perturbation so gradients are not dominated by the init symmetry.
template <typename T>
void jitter(Seq2Seq<T>& m, std::uint64_t seed, double sd = 0.1) {
  Rng rng(seed);
  for (auto& p : m.parameters())
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += static_cast<T>(rng.normal(0, sd));
}

inline Sentence symbols(const std::vector<int>& ids, const std::string& prefix = "s") {
  std::vector<Token> t;
  for (int i : ids) t.push_back(prefix + std::to_string(i));
  return sentence_from_tokens(t);
}

}  // namespace natalign::testing

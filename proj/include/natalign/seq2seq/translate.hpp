// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "natalign/corpus/tokenizer.hpp"
#include "natalign/seq2seq/inference.hpp"
#include "natalign/seq2seq/model.hpp"
#include "natalign/seq2seq/search.hpp"

namespace natalign {

struct Translation {
  Sentence sentence;
  std::vector<int> ids;
  double log_prob = 0.0;
  double score = 0.0;
  bool truncated = false;
};

/// Beam-search translation; the best length-normalized finished hypothesis,
/// or the best truncated one (flagged) when none emits EOS.
template <typename T>
Translation decode_beam(const Seq2Seq<T>& model, const Sentence& x, int beam) {
  IncrementalDecoder<T> dec(model, model.encode_source(x));
  auto r = beam_search(dec, beam);
  return {sentence_from_tokens(model.target_vocab().decode(r.tokens)), r.tokens, r.log_prob,
          r.score, r.truncated};
}

struct SampledTranslation {
  Sentence sentence;
  std::vector<int> ids;
  std::vector<double> token_log_probs;  // EOS included
  bool truncated = false;
};

/// One ancestral sample y ~ p(y | x). top_k > 0 restricts each step to the
/// k most probable tokens.
template <typename T>
SampledTranslation sample_translation(const Seq2Seq<T>& model, const Sentence& x,
                                      double temperature, Rng& rng, int top_k = 0) {
  IncrementalDecoder<T> dec(model, model.encode_source(x));
  auto r = sample_sequence(dec, rng, temperature, top_k);
  return {sentence_from_tokens(model.target_vocab().decode(r.tokens)), r.tokens,
          std::move(r.log_probs), r.truncated};
}

}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Tagging baseline: sources of pairs whose target was originally written in
// the target language get an <orig> prefix, the rest get <tran>. A tagged
// model decodes with <orig> by default.

#include <cmath>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"
#include "natalign/seq2seq/trainer.hpp"

namespace natalign {

inline const Token kOrigTagToken = "<orig>";
inline const Token kTranTagToken = "<tran>";

inline ParallelPair with_source_tag(ParallelPair p, const Token& tag) {
  p.source.tokens.insert(p.source.tokens.begin(), tag);
  p.source.raw = p.source.raw.empty() ? tag : tag + " " + p.source.raw;
  return p;
}

struct TaggingOptions {
  /// Translated pairs used per original pair; 0 keeps every translated pair.
  /// 4.8 mirrors a small original pool next to a large parallel corpus.
  double translated_per_original = 0.0;
  std::uint64_t seed = 1;
};

/// The tagged training set: all original pairs tagged <orig>, plus the
/// (optionally subsampled) translated pairs tagged <tran>, shuffled.
inline std::vector<ParallelPair> make_tagged_training_set(const std::vector<ParallelPair>& translated,
                                                          const std::vector<ParallelPair>& original,
                                                          const TaggingOptions& opt) {
  if (original.empty()) throw DataError("tagging: the original-target pool is empty");
  if (translated.empty()) throw DataError("tagging: the translated-target pool is empty");
  if (opt.translated_per_original < 0.0)
    throw ConfigError("tagging.translated_per_original", "must be >= 0");
  Rng rng(opt.seed);
  std::vector<ParallelPair> tran = translated;
  if (opt.translated_per_original > 0.0) {
    const auto want = static_cast<std::size_t>(
        std::llround(opt.translated_per_original * static_cast<double>(original.size())));
    rng.shuffle(tran);
    if (want < tran.size()) tran.resize(std::max<std::size_t>(want, 1));
  }
  std::vector<ParallelPair> out;
  out.reserve(tran.size() + original.size());
  for (const auto& p : original) out.push_back(with_source_tag(p, kOrigTagToken));
  for (const auto& p : tran) out.push_back(with_source_tag(p, kTranTagToken));
  rng.shuffle(out);
  return out;
}

/// Trains `model` (which must have config().tagged set) on the tagged union.
/// Validation pairs are scored with the <orig> tag, the inference default.
template <typename T>
TrainResult<T> train_tagged(Seq2Seq<T>& model, const std::vector<ParallelPair>& translated,
                            const std::vector<ParallelPair>& original,
                            const std::vector<ParallelPair>& valid, const TrainConfig& cfg,
                            const TaggingOptions& opt = {}) {
  if (!model.config().tagged) throw ConfigError("model.tagged", "train_tagged needs a tagged model");
  const auto train = make_tagged_training_set(translated, original, opt);
  return train_supervised(model, encode_pairs(model, train), encode_pairs(model, valid), cfg);
}

}  // namespace natalign

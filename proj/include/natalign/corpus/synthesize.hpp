// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/corpus/types.hpp"
#include "natalign/seq2seq/translate.hpp"

namespace natalign {

struct SynthesisStats {
  std::size_t translated = 0;
  std::size_t dropped_identical = 0;
};

/// Machine-translates every source with beam search and returns one MT
/// document per book. Outputs whose tokens equal the paired human target are
/// dropped, so the MT pool never contains text indistinguishable from HT.
template <typename T>
std::vector<Document> synthesize_mt_corpus(const std::vector<ParallelPair>& pairs,
                                           const Seq2Seq<T>& model, int beam = 5,
                                           const std::string& language = "",
                                           SynthesisStats* stats = nullptr) {
  if (!model.trained()) throw Error("synthesize_mt_corpus: the model has not been trained");
  std::vector<Document> docs;
  std::map<std::string, std::size_t> by_book;
  SynthesisStats st;
  for (const auto& p : pairs) {
    const auto out = decode_beam(model, p.source, beam);
    ++st.translated;
    if (out.sentence.tokens == p.target.tokens) {
      ++st.dropped_identical;
      continue;
    }
    auto [it, inserted] = by_book.emplace(p.book_id, docs.size());
    if (inserted) docs.push_back({p.book_id, language, Provenance::kMachine, {}});
    docs[it->second].sentences.push_back(out.sentence);
  }
  if (stats) *stats = st;
  return docs;
}

}  // namespace natalign

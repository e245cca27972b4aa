// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "natalign/core/utf8.hpp"
#include "natalign/corpus/tokenizer.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

struct PostprocessOptions {
  std::vector<std::string> marks = {".", ",", "!", "?", ";", ":", "\xE2\x80\xA6", "-"};

  bool collapses(std::string_view cp) const {
    for (const auto& m : marks)
      if (cp == m) return true;
    return false;
  }
};

/// Collapses each run of two or more identical marks to one. Works on code
/// points, so other bytes are never split or altered.
inline std::string postprocess_output(std::string_view raw, const PostprocessOptions& opt = {}) {
  std::string out;
  out.reserve(raw.size());
  std::string_view prev;
  for (std::string_view cp : utf8::code_points(raw)) {
    if (cp == prev && opt.collapses(cp)) continue;
    out.append(cp);
    prev = cp;
  }
  return out;
}

/// Token-level version for model output, whose raw form is space-joined
/// tokens: repeated mark tokens collapse the same way.
inline Sentence postprocess_sentence(const Sentence& s, const PostprocessOptions& opt = {}) {
  std::vector<Token> tokens;
  for (const auto& t : s.tokens) {
    if (!tokens.empty() && tokens.back() == t && opt.collapses(t)) continue;
    tokens.push_back(t);
  }
  if (s.raw == join_tokens(s.tokens)) return sentence_from_tokens(std::move(tokens));
  return tokenize(postprocess_output(s.raw, opt));
}

}  // namespace natalign

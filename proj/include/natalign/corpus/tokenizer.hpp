// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "natalign/core/utf8.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

/// Whitespace split with every punctuation code point detached as its own
/// token. Deterministic, and a fixed point of join-then-retokenize.
inline Sentence tokenize(std::string_view raw, bool lowercase = false) {
  Sentence out;
  out.raw = std::string(raw);
  const std::string text = lowercase ? utf8::to_lower(raw) : std::string(raw);
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (std::string_view cp : utf8::code_points(text)) {
    if (utf8::is_space(cp)) {
      flush();
    } else if (utf8::is_punctuation(cp)) {
      flush();
      out.tokens.emplace_back(cp);
    } else {
      current.append(cp);
    }
  }
  flush();
  return out;
}

inline std::string join_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

/// Sentence whose raw form is the space-joined tokens (model output).
inline Sentence sentence_from_tokens(std::vector<Token> tokens) {
  Sentence s;
  s.raw = join_tokens(tokens);
  s.tokens = std::move(tokens);
  return s;
}

}  // namespace natalign

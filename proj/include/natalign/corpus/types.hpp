// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "natalign/core/error.hpp"

namespace natalign {

/// Where a piece of target-language text came from.
enum class Provenance { kOriginal, kHuman, kMachine };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "OR";
    case Provenance::kHuman: return "HT";
    case Provenance::kMachine: return "MT";
  }
  return "?";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "OR") return Provenance::kOriginal;
  if (s == "HT") return Provenance::kHuman;
  if (s == "MT") return Provenance::kMachine;
  throw DataError("unknown provenance label '" + std::string(s) +
                  "' (expected OR, HT or MT)");
}

/// A binary classification view over two provenances. The first named class
/// is the less natural one; `preferred` is t1.
enum class Perspective { kHtOr, kMtHt, kMtOr };

inline constexpr std::array<Perspective, 3> kAllPerspectives = {
    Perspective::kHtOr, Perspective::kMtHt, Perspective::kMtOr};

inline std::string_view to_string(Perspective p) {
  switch (p) {
    case Perspective::kHtOr: return "HT-OR";
    case Perspective::kMtHt: return "MT-HT";
    case Perspective::kMtOr: return "MT-OR";
  }
  return "?";
}

inline Perspective parse_perspective(std::string_view s) {
  if (s == "HT-OR") return Perspective::kHtOr;
  if (s == "MT-HT") return Perspective::kMtHt;
  if (s == "MT-OR") return Perspective::kMtOr;
  throw ConfigError("perspective", "unknown perspective '" + std::string(s) +
                                       "' (expected HT-OR, MT-HT or MT-OR)");
}

/// t1: the class the reward pushes toward.
inline Provenance preferred(Perspective p) {
  return p == Perspective::kMtHt ? Provenance::kHuman : Provenance::kOriginal;
}

/// t0: the class the reward pushes away from.
inline Provenance dispreferred(Perspective p) {
  return p == Perspective::kHtOr ? Provenance::kHuman : Provenance::kMachine;
}

/// Whitespace-free token surface.
using Token = std::string;

struct Sentence {
  std::vector<Token> tokens;
  std::string raw;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::string language;
  Provenance provenance = Provenance::kHuman;
  std::vector<Sentence> sentences;
};

struct ParallelPair {
  Sentence source;
  Sentence target;
  std::string book_id;
};

/// One classifier example; label 1 means t1 (the preferred class).
struct LabeledText {
  Sentence text;
  int label = 0;
  std::string book_id;
};

using LabeledSet = std::vector<LabeledText>;

}  // namespace natalign

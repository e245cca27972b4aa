// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

/// Token <-> id bijection with six fixed specials at ids 0..5.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kOrigTag = 4;
  static constexpr int kTranTag = 5;
  static constexpr int kNumSpecials = 6;

  static constexpr std::array<std::string_view, kNumSpecials> kSpecialSurfaces =
      {"<pad>", "<s>", "</s>", "<unk>", "<orig>", "<tran>"};

  Vocabulary() {
    for (auto s : kSpecialSurfaces) add(std::string(s));
  }

  /// Appends a token if absent; returns its id.
  int add(const Token& t) {
    auto [it, inserted] = index_.emplace(t, static_cast<int>(tokens_.size()));
    if (inserted) tokens_.push_back(t);
    return it->second;
  }

  int id(const Token& t) const {
    auto it = index_.find(t);
    return it == index_.end() ? kUnk : it->second;
  }

  bool contains(const Token& t) const { return index_.count(t) != 0; }

  const Token& token(int id) const {
    if (id < 0 || id >= size()) throw Error("vocabulary id out of range");
    return tokens_[static_cast<std::size_t>(id)];
  }

  int size() const { return static_cast<int>(tokens_.size()); }

  static bool is_special(int id) { return id >= 0 && id < kNumSpecials; }

  std::vector<int> encode(const std::vector<Token>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
  }

  /// Decoding drops PAD/BOS/EOS and tags; UNK is kept as its surface.
  std::vector<Token> decode(const std::vector<int>& ids) const {
    std::vector<Token> out;
    for (int i : ids) {
      if (i == kPad || i == kBos || i == kEos || i == kOrigTag || i == kTranTag)
        continue;
      out.push_back(token(i));
    }
    return out;
  }

  void save(std::ostream& os) const {
    for (const auto& t : tokens_) os << t << '\n';
  }

  static Vocabulary load(std::istream& is) {
    Vocabulary v;
    std::string line;
    int row = 0;
    while (std::getline(is, line)) {
      if (row < kNumSpecials) {
        if (line != kSpecialSurfaces[static_cast<std::size_t>(row)])
          throw DataError("vocabulary file: special token mismatch at row " +
                          std::to_string(row));
      } else if (v.add(line) != row) {
        throw DataError("vocabulary file: duplicate token '" + line + "'");
      }
      ++row;
    }
    if (row < kNumSpecials) throw DataError("vocabulary file: truncated");
    return v;
  }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<Token> tokens_;
  std::unordered_map<Token, int> index_;
};

/// Tokens with frequency >= min_freq, ordered by descending frequency then
/// lexicographically, after the specials.
inline Vocabulary build_vocab(const std::vector<Sentence>& corpus, int min_freq) {
  if (min_freq < 1) throw ConfigError("min_freq", "must be >= 1");
  std::map<Token, long> counts;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens) ++counts[t];
  std::vector<std::pair<Token, long>> kept;
  for (auto& [t, c] : counts)
    if (c >= min_freq) kept.emplace_back(t, c);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [t, c] : kept) v.add(t);
  return v;
}

}  // namespace natalign

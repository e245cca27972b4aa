// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace natalign::utf8 {

/// Byte length of the code point starting with lead byte `c`. Invalid lead
/// bytes count as a single byte so decoding always makes progress.
inline std::size_t sequence_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

/// Split into code points, each kept as its UTF-8 byte string.
inline std::vector<std::string_view> code_points(std::string_view s) {
  std::vector<std::string_view> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t n = sequence_length(static_cast<unsigned char>(s[i]));
    if (i + n > s.size()) n = s.size() - i;
    out.push_back(s.substr(i, n));
    i += n;
  }
  return out;
}

inline bool is_space(std::string_view cp) {
  if (cp.size() == 1) {
    const char c = cp[0];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  }
  // NBSP and the common typographic spaces.
  return cp == "\xC2\xA0" || cp == "\xE2\x80\x89" || cp == "\xE2\x80\xAF" ||
         cp == "\xE3\x80\x80";
}

/// ASCII punctuation plus the typographic marks that show up in book text.
inline bool is_punctuation(std::string_view cp) {
  if (cp.size() == 1) {
    const unsigned char c = static_cast<unsigned char>(cp[0]);
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  static constexpr std::string_view kMarks[] = {
      "\xE2\x80\xA6",  // …
      "\xE2\x80\x93",  // –
      "\xE2\x80\x94",  // —
      "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9C", "\xE2\x80\x9D",
      "\xE2\x80\x9E",  // „
      "\xC2\xAB", "\xC2\xBB",  // « »
      "\xC2\xBF", "\xC2\xA1",  // ¿ ¡
  };
  for (auto m : kMarks) {
    if (cp == m) return true;
  }
  return false;
}

/// Lowercase ASCII and the Latin-1 supplement letters; everything else is
/// passed through.
inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c + 32));
    } else if (c == 0xC3 && i + 1 < s.size()) {
      unsigned char d = static_cast<unsigned char>(s[i + 1]);
      // U+00C0..U+00DE except U+00D7 (multiplication sign).
      if (d >= 0x80 && d <= 0x9E && d != 0x97) d = static_cast<unsigned char>(d + 0x20);
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(d));
      ++i;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

}  // namespace natalign::utf8

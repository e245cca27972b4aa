// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Minimal framed binary IO shared by the checkpoint and classifier files.
// Values are written in host byte order; every supported target is
// little-endian.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "natalign/core/error.hpp"

namespace natalign::bin {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

template <typename V>
  requires std::is_arithmetic_v<V>
void write(std::ostream& os, V v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

inline void write_string(std::ostream& os, const std::string& s) {
  write<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* data, std::size_t n, const char* what) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw DataError(std::string("truncated file while reading ") + what);
}

template <typename V>
  requires std::is_arithmetic_v<V>
V read(std::istream& is, const char* what) {
  V v{};
  read_bytes(is, &v, sizeof(V), what);
  return v;
}

inline std::string read_string(std::istream& is, const char* what, std::uint64_t limit = 1u << 30) {
  const auto n = read<std::uint64_t>(is, what);
  if (n > limit) throw DataError(std::string("implausible length for ") + what);
  std::string s(n, '\0');
  read_bytes(is, s.data(), n, what);
  return s;
}

}  // namespace natalign::bin

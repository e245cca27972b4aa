// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>

#include "natalign/classifier/classifier.hpp"
#include "natalign/core/binary_io.hpp"

namespace natalign {

inline constexpr char kClassifierMagic[8] = {'N', 'A', 'T', 'C', 'L', 'F', '\0', '\0'};
inline constexpr std::uint32_t kClassifierVersion = 1;

// Layout: magic[8] u32:version u8:perspective i32:min_order i32:max_order
// u8:word_unigrams i32:hash_bits u8:lowercase f64:bias u64:nnz then nnz
// pairs of (u32 index, f64 weight) in increasing index order.
inline void write_classifier(std::ostream& os, const NaturalnessClassifier& c) {
  bin::write_bytes(os, kClassifierMagic, sizeof kClassifierMagic);
  bin::write<std::uint32_t>(os, kClassifierVersion);
  bin::write<std::uint8_t>(os, static_cast<std::uint8_t>(c.perspective()));
  const auto& s = c.spec();
  bin::write<std::int32_t>(os, s.min_order);
  bin::write<std::int32_t>(os, s.max_order);
  bin::write<std::uint8_t>(os, s.word_unigrams ? 1 : 0);
  bin::write<std::int32_t>(os, s.hash_bits);
  bin::write<std::uint8_t>(os, s.lowercase ? 1 : 0);
  bin::write<double>(os, c.bias());
  std::uint64_t nnz = 0;
  for (double w : c.weights()) nnz += w != 0.0;
  bin::write<std::uint64_t>(os, nnz);
  for (std::size_t i = 0; i < c.weights().size(); ++i) {
    if (c.weights()[i] == 0.0) continue;
    bin::write<std::uint32_t>(os, static_cast<std::uint32_t>(i));
    bin::write<double>(os, c.weights()[i]);
  }
  if (!os) throw Error("failed writing classifier");
}

inline NaturalnessClassifier read_classifier(std::istream& is) {
  char magic[sizeof kClassifierMagic];
  bin::read_bytes(is, magic, sizeof magic, "classifier magic");
  if (std::memcmp(magic, kClassifierMagic, sizeof magic) != 0) throw DataError("not a natalign classifier");
  const auto version = bin::read<std::uint32_t>(is, "classifier version");
  if (version != kClassifierVersion)
    throw DataError("unsupported classifier version " + std::to_string(version));
  const auto p = bin::read<std::uint8_t>(is, "perspective");
  if (p > 2) throw DataError("classifier file: bad perspective tag");
  FeatureSpec s;
  s.min_order = bin::read<std::int32_t>(is, "min_order");
  s.max_order = bin::read<std::int32_t>(is, "max_order");
  s.word_unigrams = bin::read<std::uint8_t>(is, "word_unigrams") != 0;
  s.hash_bits = bin::read<std::int32_t>(is, "hash_bits");
  s.lowercase = bin::read<std::uint8_t>(is, "lowercase") != 0;
  s.validate();
  NaturalnessClassifier c(static_cast<Perspective>(p), s);
  c.set_bias(bin::read<double>(is, "bias"));
  const auto nnz = bin::read<std::uint64_t>(is, "weight count");
  if (nnz > s.dimension()) throw DataError("classifier file: too many weights");
  for (std::uint64_t k = 0; k < nnz; ++k) {
    const auto i = bin::read<std::uint32_t>(is, "weight index");
    if (i >= s.dimension()) throw DataError("classifier file: weight index out of range");
    c.weights()[i] = bin::read<double>(is, "weight");
  }
  return c;
}

inline void save_classifier(const std::filesystem::path& path, const NaturalnessClassifier& c) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_classifier(os, c);
}

inline NaturalnessClassifier load_classifier(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open classifier '" + path.string() + "'");
  return read_classifier(is);
}

}  // namespace natalign

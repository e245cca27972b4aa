// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "natalign/core/binary_io.hpp"
#include "natalign/seq2seq/model.hpp"

namespace natalign {

template <typename T>
struct Checkpoint {
  Seq2Seq<T> model;
  long step = 0;
  double valid_loss = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t config_hash = 0;
};

template <typename T>
Checkpoint<T> make_checkpoint(const Seq2Seq<T>& model, double valid_loss) {
  return {model, model.steps_trained(), valid_loss, model.config().hash()};
}

inline constexpr char kCheckpointMagic[8] = {'N', 'A', 'T', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: magic[8] u32:version u32:scalar_bytes str:config str:src_vocab
// str:tgt_vocab i64:step f64:valid_loss u64:config_hash u32:n_params
// then per parameter str:name u32:rows u32:cols raw values (row-major).
template <typename T>
void write_checkpoint(std::ostream& os, const Checkpoint<T>& ck) {
  const auto& m = ck.model;
  bin::write_bytes(os, kCheckpointMagic, sizeof kCheckpointMagic);
  bin::write<std::uint32_t>(os, kCheckpointVersion);
  bin::write<std::uint32_t>(os, sizeof(T));
  bin::write_string(os, m.config().serialize());
  std::ostringstream sv, tv;
  m.source_vocab().save(sv);
  m.target_vocab().save(tv);
  bin::write_string(os, sv.str());
  bin::write_string(os, tv.str());
  bin::write<std::int64_t>(os, ck.step);
  bin::write<double>(os, ck.valid_loss);
  bin::write<std::uint64_t>(os, ck.config_hash);
  bin::write<std::uint32_t>(os, static_cast<std::uint32_t>(m.parameters().size()));
  for (const auto& p : m.parameters()) {
    bin::write_string(os, p.name);
    bin::write<std::uint32_t>(os, static_cast<std::uint32_t>(p.value.rows()));
    bin::write<std::uint32_t>(os, static_cast<std::uint32_t>(p.value.cols()));
    bin::write_bytes(os, p.value.data(), sizeof(T) * static_cast<std::size_t>(p.value.size()));
  }
  if (!os) throw Error("failed writing checkpoint");
}

template <typename T>
Checkpoint<T> read_checkpoint(std::istream& is) {
  char magic[sizeof kCheckpointMagic];
  bin::read_bytes(is, magic, sizeof magic, "checkpoint magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw DataError("not a natalign checkpoint");
  const auto version = bin::read<std::uint32_t>(is, "checkpoint version");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto scalar = bin::read<std::uint32_t>(is, "scalar size");
  if (scalar != sizeof(T))
    throw DataError("checkpoint stores " + std::to_string(scalar) + "-byte scalars, expected " +
                    std::to_string(sizeof(T)));
  const ModelConfig cfg = ModelConfig::parse(bin::read_string(is, "model config"));
  std::istringstream sv(bin::read_string(is, "source vocabulary"));
  std::istringstream tv(bin::read_string(is, "target vocabulary"));
  Checkpoint<T> ck;
  ck.model = Seq2Seq<T>(cfg, Vocabulary::load(sv), Vocabulary::load(tv), 0);
  if (!(ck.model.config() == cfg)) throw DataError("checkpoint config disagrees with vocabularies");
  ck.step = static_cast<long>(bin::read<std::int64_t>(is, "step"));
  ck.valid_loss = bin::read<double>(is, "validation loss");
  ck.config_hash = bin::read<std::uint64_t>(is, "config hash");
  if (ck.config_hash != cfg.hash()) throw DataError("checkpoint config hash mismatch");
  const auto n = bin::read<std::uint32_t>(is, "parameter count");
  std::vector<Parameter<T>> loaded(n);
  for (auto& p : loaded) {
    p.name = bin::read_string(is, "parameter name", 4096);
    const auto rows = bin::read<std::uint32_t>(is, "parameter rows");
    const auto cols = bin::read<std::uint32_t>(is, "parameter cols");
    p.value.resize(rows, cols);
    bin::read_bytes(is, p.value.data(), sizeof(T) * static_cast<std::size_t>(p.value.size()),
                    p.name.c_str());
  }
  ck.model.load_parameters(std::move(loaded));
  ck.model.set_steps_trained(ck.step);
  return ck;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ck) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(os, ck);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint<T>(is);
}

}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

/// Balanced binary dataset for one perspective. The larger provenance pool is
/// down-sampled with a seeded shuffle; the result is shuffled as well.
inline LabeledSet make_classifier_dataset(Perspective perspective,
                                          const std::vector<Document>& pools,
                                          std::uint64_t seed) {
  const Provenance pos = preferred(perspective);
  const Provenance neg = dispreferred(perspective);
  LabeledSet positives, negatives;
  for (const auto& d : pools) {
    if (d.provenance != pos && d.provenance != neg) continue;
    auto& dst = d.provenance == pos ? positives : negatives;
    for (const auto& s : d.sentences)
      dst.push_back({s, d.provenance == pos ? 1 : 0, d.id});
  }
  if (positives.empty())
    throw DataError(std::string(to_string(perspective)) + " dataset: no " +
                    std::string(to_string(pos)) + " documents in the pools");
  if (negatives.empty())
    throw DataError(std::string(to_string(perspective)) + " dataset: no " +
                    std::string(to_string(neg)) + " documents in the pools");
  Rng rng(seed);
  rng.shuffle(positives);
  rng.shuffle(negatives);
  const std::size_t n = std::min(positives.size(), negatives.size());
  positives.resize(n);
  negatives.resize(n);
  LabeledSet out = std::move(positives);
  out.insert(out.end(), negatives.begin(), negatives.end());
  rng.shuffle(out);
  return out;
}

}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdio>
#include <optional>
#include <ostream>
#include <vector>

#include "natalign/corpus/types.hpp"
#include "natalign/reward/reward.hpp"

namespace natalign {

/// Validation snapshot of one checkpoint; step 0 is the base model. Rates
/// and content are fractions in [0, 1].
struct CurvePoint {
  long step = 0;
  std::array<std::optional<double>, 3> rates;  // HT-OR, MT-HT, MT-OR
  double mtld = 0.0;
  double content = 0.0;
  double hm = 0.0;  // harmonic mean of the target perspective's rate and content
};

inline std::size_t perspective_index(Perspective p) {
  for (std::size_t i = 0; i < kAllPerspectives.size(); ++i)
    if (kAllPerspectives[i] == p) return i;
  return 0;
}

inline CurvePoint make_curve_point(long step, const std::array<std::optional<double>, 3>& rates,
                                   double mtld, double content, Perspective target) {
  CurvePoint c{step, rates, mtld, content, 0.0};
  const auto& rate = rates[perspective_index(target)];
  c.hm = rate ? overall_reward(*rate, content) : 0.0;
  return c;
}

inline void write_curves_tsv(std::ostream& os, const std::vector<CurvePoint>& points) {
  os << "step\tht_or\tmt_ht\tmt_or\tmtld\tcontent\thm\n";
  char buf[64];
  for (const auto& p : points) {
    os << p.step;
    for (const auto& r : p.rates) {
      if (r) {
        std::snprintf(buf, sizeof buf, "%.4f", *r);
        os << '\t' << buf;
      } else {
        os << "\tNA";
      }
    }
    std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f\t%.4f\n", p.mtld, p.content, p.hm);
    os << buf;
  }
}

}  // namespace natalign

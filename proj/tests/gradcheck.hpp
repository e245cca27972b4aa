// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Finite-difference helpers shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "model_fixtures.hpp"
#include "natalign/align/align.hpp"

namespace natalign::testing {

inline std::vector<AlignExample> frozen_batch(const Seq2Seq<double>& m, std::uint64_t seed, bool zero_rewards) {
  Rng rng(seed);
  std::vector<AlignExample> batch;
  for (int b = 0; b < 3; ++b) {
    std::vector<int> src_sym, ref_sym;
    for (std::size_t k = 0, n = 1 + rng.index(4); k < n; ++k) src_sym.push_back(static_cast<int>(rng.index(6)));
    for (std::size_t k = 0, n = 1 + rng.index(4); k < n; ++k) ref_sym.push_back(static_cast<int>(rng.index(6)));
    AlignExample ex{m.encode_source(symbols(src_sym)), m.encode_target(symbols(ref_sym, "t")), {}};
    for (int s = 0; s < 2; ++s) {
      std::vector<int> ids;
      for (std::size_t k = 0, n = rng.index(5); k < n; ++k) ids.push_back(Vocabulary::kUnk + 3 + static_cast<int>(rng.index(6)));
      ex.samples.push_back({ids, zero_rewards ? 0.0 : rng.uniform(0.0, 1.0)});
    }
    batch.push_back(std::move(ex));
  }
  return batch;
}

// Objective written directly from per-token log-probabilities.
inline double oracle_objective(const Seq2Seq<double>& m, const std::vector<AlignExample>& batch, double beta) {
  double nll = 0, rw = 0;
  std::size_t ns = 0;
  for (const auto& ex : batch) {
    double lp = 0;
    for (double v : token_log_probs(m, ex.src, ex.ref)) lp += v;
    nll += -lp / static_cast<double>(ex.ref.size() + 1);
    for (const auto& s : ex.samples) {
      double sp = 0;
      for (double v : token_log_probs(m, ex.src, s.ids)) sp += v;
      rw += -s.weight * sp / static_cast<double>(s.ids.size() + 1);
      ++ns;
    }
  }
  return beta * nll / static_cast<double>(batch.size()) + rw / static_cast<double>(ns);
}

/// Largest relative error between the accumulated gradient in `m` and
/// central differences of `loss`, over a few random entries of every
/// parameter tensor. `probes` receives the number of entries checked.
inline double max_relative_error(Seq2Seq<double>& m, const std::function<double()>& loss, std::uint64_t seed,
                                 int* probes) {
  Rng rng(seed);
  double worst = 0.0;
  *probes = 0;
  for (auto& p : m.parameters()) {
    const int n = p.value.size() > 100 ? 3 : 2;
    for (int k = 0; k < n; ++k, ++*probes) {
      const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p.value.size())));
      double& w = p.value.data()[i];
      const double saved = w, h = 1e-5;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p.grad.data()[i];
      worst = std::max(worst, std::abs(numeric - analytic) /
                                  std::max({std::abs(numeric), std::abs(analytic), 1e-7}));
    }
  }
  return worst;
}

}  // namespace natalign::testing

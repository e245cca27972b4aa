// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/reward/reward.hpp"
#include "natalign/seq2seq/checkpoint.hpp"

namespace natalign {

/// Validation summary of one checkpoint. Both values are in [0, 1].
struct CheckpointEval {
  long step = 0;
  double classification_rate = 0.0;
  double content = 0.0;

  double hm() const { return overall_reward(classification_rate, content); }
};

enum class SelectionCriterion { kFixedStep, kMaxHm };

inline SelectionCriterion parse_selection_criterion(std::string_view s) {
  if (s == "fixed") return SelectionCriterion::kFixedStep;
  if (s == "hm") return SelectionCriterion::kMaxHm;
  throw ConfigError("align.select", "unknown criterion '" + std::string(s) + "' (expected fixed|hm)");
}

/// Index of the chosen evaluation. Fixed-step takes the exact step if present,
/// else the latest one before it, else the earliest. Max-HM takes the
/// highest harmonic mean, earliest on ties.
inline std::size_t select_checkpoint(const std::vector<CheckpointEval>& evals,
                                     SelectionCriterion criterion, long fixed_step = 5000) {
  if (evals.empty()) throw Error("select_checkpoint: no checkpoints");
  std::size_t best = 0;
  if (criterion == SelectionCriterion::kMaxHm) {
    for (std::size_t i = 1; i < evals.size(); ++i)
      if (evals[i].hm() > evals[best].hm()) best = i;
    return best;
  }
  bool found = false;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (evals[i].step > fixed_step) continue;
    if (!found || evals[i].step > evals[best].step) best = i;
    found = true;
  }
  if (found) return best;
  for (std::size_t i = 1; i < evals.size(); ++i)
    if (evals[i].step < evals[best].step) best = i;
  return best;
}

/// Matches evaluations to checkpoints by step.
template <typename T>
const Checkpoint<T>& select_checkpoint(const std::vector<Checkpoint<T>>& checkpoints,
                                       const std::vector<CheckpointEval>& evals,
                                       SelectionCriterion criterion, long fixed_step = 5000) {
  if (checkpoints.empty()) throw Error("select_checkpoint: no checkpoints");
  if (checkpoints.size() == 1) return checkpoints.front();
  const long step = evals.at(select_checkpoint(evals, criterion, fixed_step)).step;
  for (const auto& c : checkpoints)
    if (c.step == step) return c;
  throw Error("select_checkpoint: no checkpoint at step " + std::to_string(step));
}

}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "natalign/core/error.hpp"

namespace natalign {

/// Thresholded naturalness reward: 0 below sigma_t, the probability itself
/// at or above it.
inline double naturalness_reward(double p, double sigma_t) { return p < sigma_t ? 0.0 : p; }

/// Thresholded content reward, same shape as the naturalness one.
inline double content_reward(double c, double sigma_c) { return c < sigma_c ? 0.0 : c; }

/// Harmonic mean of the two rewards, 0 when either is 0.
inline double overall_reward(double r_t, double r_c) {
  if (r_t == 0.0 || r_c == 0.0) return 0.0;
  return 2.0 / (1.0 / r_t + 1.0 / r_c);
}

/// Which reward drives the policy update.
enum class RewardMode { kBoth, kClassifierOnly, kContentOnly };

inline std::string_view to_string(RewardMode m) {
  switch (m) {
    case RewardMode::kBoth: return "both";
    case RewardMode::kClassifierOnly: return "classifier";
    case RewardMode::kContentOnly: return "content";
  }
  return "?";
}

inline RewardMode parse_reward_mode(std::string_view s) {
  if (s == "both") return RewardMode::kBoth;
  if (s == "classifier") return RewardMode::kClassifierOnly;
  if (s == "content") return RewardMode::kContentOnly;
  throw ConfigError("reward.mode", "unknown mode '" + std::string(s) + "' (both|classifier|content)");
}

struct RewardConfig {
  double sigma_t = 0.5;
  double sigma_c = 0.85;
  double beta = 0.5;
  RewardMode mode = RewardMode::kBoth;

  void validate() const {
    if (!(sigma_t >= 0.0 && sigma_t <= 1.0)) throw ConfigError("reward.sigma_t", "must be in [0, 1]");
    if (!(sigma_c >= 0.0 && sigma_c <= 1.0)) throw ConfigError("reward.sigma_c", "must be in [0, 1]");
    if (!(beta >= 0.0)) throw ConfigError("reward.beta", "must be >= 0");
  }
};

struct RewardBreakdown {
  double p = 0.0;    // raw classifier probability of t1
  double c = 0.0;    // raw content score
  double r_t = 0.0;
  double r_c = 0.0;
  double r = 0.0;    // reward that weights the policy gradient
};

inline RewardBreakdown compute_reward(double p, double c, const RewardConfig& cfg) {
  RewardBreakdown b;
  b.p = p;
  b.c = c;
  b.r_t = naturalness_reward(p, cfg.sigma_t);
  b.r_c = content_reward(c, cfg.sigma_c);
  switch (cfg.mode) {
    case RewardMode::kBoth: b.r = overall_reward(b.r_t, b.r_c); break;
    case RewardMode::kClassifierOnly: b.r = b.r_t; break;
    case RewardMode::kContentOnly: b.r = b.r_c; break;
  }
  return b;
}

}  // namespace natalign

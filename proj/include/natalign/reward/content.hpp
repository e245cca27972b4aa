// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/utf8.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

/// Reference-aware content score C(x, y, y_hat) in [0, 1].
class ContentScorer {
 public:
  virtual ~ContentScorer() = default;
  virtual double score(const Sentence& source, const Sentence& reference,
                       const Sentence& hypothesis) const = 0;
  virtual std::string name() const = 0;
};

/// Character n-gram F-score (chrF). Whitespace is ignored; precision and
/// recall are averaged over the orders for which the reference has at least
/// one n-gram, then combined into F_beta. The source is unused.
class ChrfScorer : public ContentScorer {
 public:
  explicit ChrfScorer(int max_order = 6, double beta = 1.0) : max_order_(max_order), beta_(beta) {
    if (max_order < 1) throw ConfigError("reward.chrf_order", "must be >= 1");
  }

  double score(const Sentence&, const Sentence& reference, const Sentence& hypothesis) const override {
    return chrf(reference, hypothesis);
  }
  std::string name() const override { return "chrF"; }

  double chrf(const Sentence& reference, const Sentence& hypothesis) const {
    const auto ref = characters(reference);
    const auto hyp = characters(hypothesis);
    if (hyp.empty() || ref.empty()) return 0.0;
    double p_sum = 0.0, r_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= max_order_; ++n) {
      const auto rc = ngrams(ref, n);
      if (rc.empty()) break;
      const auto hc = ngrams(hyp, n);
      std::size_t ref_total = 0, hyp_total = 0, match = 0;
      for (const auto& [g, k] : rc) ref_total += k;
      for (const auto& [g, k] : hc) {
        hyp_total += k;
        auto it = rc.find(g);
        if (it != rc.end()) match += std::min(k, it->second);
      }
      p_sum += hyp_total ? static_cast<double>(match) / static_cast<double>(hyp_total) : 0.0;
      r_sum += static_cast<double>(match) / static_cast<double>(ref_total);
      ++orders;
    }
    const double p = p_sum / orders, r = r_sum / orders;
    if (p + r == 0.0) return 0.0;
    const double b2 = beta_ * beta_;
    return std::clamp((1.0 + b2) * p * r / (b2 * p + r), 0.0, 1.0);
  }

 private:
  static std::vector<std::string> characters(const Sentence& s) {
    std::vector<std::string> out;
    for (const auto& t : s.tokens)
      for (auto cp : utf8::code_points(t))
        if (!utf8::is_space(cp)) out.emplace_back(cp);
    return out;
  }

  static std::map<std::string, std::size_t> ngrams(const std::vector<std::string>& chars, int n) {
    std::map<std::string, std::size_t> out;
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= chars.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < un; ++k) g += chars[i + k];
      ++out[g];
    }
    return out;
  }

  int max_order_;
  double beta_;
};

inline std::unique_ptr<ContentScorer> make_content_scorer(std::string_view name) {
  if (name == "chrf") return std::make_unique<ChrfScorer>();
  throw ConfigError("reward.content_scorer", "unknown scorer '" + std::string(name) + "'");
}

/// Nearest-rank percentile (q in (0, 1]) of base-model content scores; an
/// optional per-corpus calibration of sigma_c for the surrogate scorer.
inline double calibrate_threshold(std::vector<double> scores, double q = 0.6) {
  if (scores.empty()) throw Error("calibrate_threshold: no scores");
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("reward.sigma_c_percentile", "must be in (0, 1]");
  std::sort(scores.begin(), scores.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(scores.size())));
  return scores[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace natalign

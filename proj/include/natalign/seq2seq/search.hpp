// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Decoding strategies over any autoregressive model exposing an explicit
// per-hypothesis state: beam search, greedy decoding and ancestral sampling.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"

namespace natalign {

template <typename M>
concept DecodingModel = requires(const M& m, const typename M::State& s, int token) {
  { m.initial_state() } -> std::same_as<typename M::State>;
  { m.advance(s, token) } -> std::same_as<typename M::State>;
  { m.next_log_probs(s) } -> std::convertible_to<const std::vector<double>&>;
  { m.eos() } -> std::convertible_to<int>;
  { m.max_steps() } -> std::convertible_to<int>;
};

struct DecodeResult {
  std::vector<int> tokens;  // EOS excluded
  double log_prob = 0.0;    // EOS included when finished
  double score = 0.0;       // log_prob / length
  bool truncated = false;   // no EOS within the step budget
};

inline double length_normalized(double log_prob, std::size_t tokens, bool finished) {
  const std::size_t len = tokens + (finished ? 1 : 0);
  return len == 0 ? 0.0 : log_prob / static_cast<double>(len);
}

/// Greedy argmax decoding.
template <DecodingModel M>
DecodeResult greedy_decode(const M& model, int max_steps = -1) {
  if (max_steps < 0) max_steps = model.max_steps();
  DecodeResult r;
  auto state = model.initial_state();
  for (int step = 0; step < max_steps; ++step) {
    const std::vector<double>& lp = model.next_log_probs(state);
    const int tok = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    r.log_prob += lp[static_cast<std::size_t>(tok)];
    if (tok == model.eos()) {
      r.score = length_normalized(r.log_prob, r.tokens.size(), true);
      return r;
    }
    r.tokens.push_back(tok);
    if (step + 1 < max_steps) state = model.advance(state, tok);
  }
  r.truncated = true;
  r.score = length_normalized(r.log_prob, r.tokens.size(), false);
  return r;
}

/// Beam search with length-normalized final selection. Hypotheses are pruned
/// by cumulative log-probability; one that emits EOS is set aside, and the
/// search stops once `beam` hypotheses have finished or the step budget is
/// spent. The greedy path is always among the finalists, so a wider beam
/// never returns a lower normalized score than beam == 1, which is exactly
/// greedy decoding. A hypothesis without EOS is returned only when nothing
/// finished, flagged as truncated.
template <DecodingModel M>
DecodeResult beam_search(const M& model, int beam, int max_steps = -1) {
  if (beam < 1) throw Error("beam size must be >= 1");
  if (max_steps < 0) max_steps = model.max_steps();
  DecodeResult greedy = greedy_decode(model, max_steps);
  if (beam == 1) return greedy;

  using State = typename M::State;
  struct Hyp {
    State state;
    std::vector<int> tokens;
    double log_prob;
  };
  struct Candidate {
    std::size_t parent;
    int token;
    double log_prob;
  };

  std::vector<Hyp> live;
  live.push_back({model.initial_state(), {}, 0.0});
  std::vector<DecodeResult> finished;
  const int eos = model.eos();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  for (int step = 0; step < max_steps && !live.empty(); ++step) {
    std::vector<Candidate> cands;
    for (std::size_t h = 0; h < live.size(); ++h) {
      const std::vector<double>& lp = model.next_log_probs(live[h].state);
      std::vector<int> order(lp.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(beam), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](int a, int b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); });
      for (std::size_t i = 0; i < k; ++i) {
        const double v = lp[static_cast<std::size_t>(order[i])];
        if (v == kNegInf) break;
        cands.push_back({h, order[i], live[h].log_prob + v});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.log_prob > b.log_prob;
    });
    if (cands.size() > static_cast<std::size_t>(beam)) cands.resize(static_cast<std::size_t>(beam));

    std::vector<Hyp> next;
    for (const auto& c : cands) {
      const Hyp& parent = live[c.parent];
      if (c.token == eos) {
        finished.push_back({parent.tokens, c.log_prob,
                            length_normalized(c.log_prob, parent.tokens.size(), true), false});
      } else {
        std::vector<int> tokens = parent.tokens;
        tokens.push_back(c.token);
        State st = step + 1 < max_steps ? model.advance(parent.state, c.token) : parent.state;
        next.push_back({std::move(st), std::move(tokens), c.log_prob});
      }
    }
    live = std::move(next);
    if (finished.size() >= static_cast<std::size_t>(beam)) break;
  }

  auto better = [](const DecodeResult& a, const DecodeResult& b) { return a.score > b.score; };
  if (!greedy.truncated) finished.push_back(greedy);
  if (!finished.empty()) return *std::min_element(finished.begin(), finished.end(), better);

  std::vector<DecodeResult> cut{greedy};
  for (const auto& h : live)
    cut.push_back({h.tokens, h.log_prob, length_normalized(h.log_prob, h.tokens.size(), false), true});
  return *std::min_element(cut.begin(), cut.end(), better);
}

/// Index of the largest entry; ties go to the lowest index.
inline int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Draw from softmax(log_probs / temperature), optionally restricted to the
/// top_k most probable entries. Below a temperature of 1e-6 this is argmax.
inline int sample_categorical(const std::vector<double>& log_probs, double temperature, Rng& rng,
                              int top_k = 0) {
  if (!(temperature > 0.0)) throw Error("sampling temperature must be > 0");
  if (temperature < 1e-6) return argmax(log_probs);
  std::vector<int> allowed(log_probs.size());
  std::iota(allowed.begin(), allowed.end(), 0);
  if (top_k > 0 && static_cast<std::size_t>(top_k) < allowed.size()) {
    std::partial_sort(allowed.begin(), allowed.begin() + top_k, allowed.end(), [&](int a, int b) {
      return log_probs[a] > log_probs[b] || (log_probs[a] == log_probs[b] && a < b);
    });
    allowed.resize(static_cast<std::size_t>(top_k));
    std::sort(allowed.begin(), allowed.end());
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (int i : allowed) mx = std::max(mx, log_probs[static_cast<std::size_t>(i)]);
  std::vector<double> w(allowed.size());
  double total = 0.0;
  for (std::size_t j = 0; j < allowed.size(); ++j) {
    w[j] = std::exp((log_probs[static_cast<std::size_t>(allowed[j])] - mx) / temperature);
    total += w[j];
  }
  double u = rng.uniform() * total;
  for (std::size_t j = 0; j < allowed.size(); ++j) {
    u -= w[j];
    if (u < 0.0) return allowed[j];
  }
  // Rounding left u marginally positive; take the last entry with mass.
  for (std::size_t j = allowed.size(); j-- > 0;)
    if (w[j] > 0.0) return allowed[j];
  return allowed.back();
}

struct SampleResult {
  std::vector<int> tokens;         // EOS excluded
  std::vector<double> log_probs;   // model log-prob of each emitted token, EOS included
  bool truncated = false;

  double total_log_prob() const {
    return std::accumulate(log_probs.begin(), log_probs.end(), 0.0);
  }
};

/// Ancestral sampling. Returned log-probs are the model's untempered
/// log p(token | prefix) of exactly the tokens drawn.
template <DecodingModel M>
SampleResult sample_sequence(const M& model, Rng& rng, double temperature = 1.0, int top_k = 0,
                             int max_steps = -1) {
  if (max_steps < 0) max_steps = model.max_steps();
  SampleResult out;
  auto state = model.initial_state();
  for (int step = 0; step < max_steps; ++step) {
    const std::vector<double>& lp = model.next_log_probs(state);
    const int tok = sample_categorical(lp, temperature, rng, top_k);
    out.log_probs.push_back(lp[static_cast<std::size_t>(tok)]);
    if (tok == model.eos()) return out;
    out.tokens.push_back(tok);
    if (step + 1 < max_steps) {
      if constexpr (requires { model.advance_in_place(state, tok); })
        model.advance_in_place(state, tok);
      else
        state = model.advance(state, tok);
    }
  }
  out.truncated = true;
  return out;
}

}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reward-driven fine-tuning of a trained translation model: sample outputs,
// score them with a naturalness classifier and a content scorer, and update
// the policy on beta * NLL(reference) + reward-weighted NLL(sample).

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "natalign/classifier/classifier.hpp"
#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"
#include "natalign/corpus/types.hpp"
#include "natalign/reward/content.hpp"
#include "natalign/reward/reward.hpp"
#include "natalign/seq2seq/checkpoint.hpp"
#include "natalign/seq2seq/optimizer.hpp"
#include "natalign/seq2seq/translate.hpp"

namespace natalign {

struct AlignConfig {
  RewardConfig reward;
  Perspective perspective = Perspective::kMtHt;
  int samples_per_source = 1;
  double temperature = 1.0;
  int top_k = 0;  // 0 samples from the full distribution
  double lr = 2e-4;
  int warmup = 0;
  double weight_decay = 0.0;
  int batch = 16;
  int max_steps = 1000;
  int checkpoint_interval = 100;
  double clip = 1.0;
  bool baseline = false;  // moving-average reward baseline
  double baseline_decay = 0.9;
  std::uint64_t seed = 1;

  void validate() const {
    reward.validate();
    if (samples_per_source < 1) throw ConfigError("align.samples_per_source", "must be >= 1");
    if (!(temperature > 0.0)) throw ConfigError("align.temperature", "must be positive");
    if (top_k < 0) throw ConfigError("align.top_k", "must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("align.lr", "must be positive");
    if (warmup < 0) throw ConfigError("align.warmup", "must be >= 0");
    if (weight_decay < 0.0) throw ConfigError("align.weight_decay", "must be >= 0");
    if (batch < 1) throw ConfigError("align.batch", "must be >= 1");
    if (max_steps < 1) throw ConfigError("align.max_steps", "must be >= 1");
    if (checkpoint_interval < 1) throw ConfigError("align.checkpoint_interval", "must be >= 1");
    if (clip < 0.0) throw ConfigError("align.clip", "must be >= 0");
    if (!(baseline_decay >= 0.0 && baseline_decay < 1.0))
      throw ConfigError("align.baseline_decay", "must be in [0, 1)");
  }
};

struct AlignStepLog {
  long step = 0;
  double r_t = 0.0;  // batch means
  double r_c = 0.0;
  double r = 0.0;
  double nll = 0.0;          // mean per-token NLL of the references
  double reward_loss = 0.0;  // mean over samples of -(r/m) sum log p
  double total = 0.0;        // beta * nll + reward_loss
};

inline void write_step_log_header(std::ostream& os) {
  os << "step\tr_t\tr_c\tr\tnll\treward_loss\ttotal\n";
}

inline void write_step_log(std::ostream& os, const AlignStepLog& l) {
  const auto f = os.flags();
  os << l.step << std::fixed << std::setprecision(6) << '\t' << l.r_t << '\t' << l.r_c << '\t'
     << l.r << '\t' << l.nll << '\t' << l.reward_loss << '\t' << l.total << '\n';
  os.flags(f);
}

/// A sampled output with its reward weight, ready for the gradient step.
struct ScoredSample {
  std::vector<int> ids;  // EOS excluded; the sample ended with EOS
  double weight = 0.0;   // r, or r - baseline
};

/// One source with its reference and the samples drawn for it.
struct AlignExample {
  std::vector<int> src;
  std::vector<int> ref;
  std::vector<ScoredSample> samples;
};

struct AlignLoss {
  double nll = 0.0;
  double reward_loss = 0.0;
  double total = 0.0;
};

/// Value of the combined objective without touching gradients.
template <typename T>
AlignLoss align_objective(const Seq2Seq<T>& model, const std::vector<AlignExample>& batch,
                          double beta) {
  if (batch.empty()) throw Error("align_objective: empty batch");
  AlignLoss L;
  std::size_t n_samples = 0;
  for (const auto& ex : batch) {
    const auto lp = token_log_probs(model, ex.src, ex.ref);
    L.nll -= std::accumulate(lp.begin(), lp.end(), 0.0) / static_cast<double>(lp.size());
    for (const auto& s : ex.samples) {
      ++n_samples;
      if (s.weight == 0.0) continue;
      const auto sp = token_log_probs(model, ex.src, s.ids);
      L.reward_loss -= s.weight * std::accumulate(sp.begin(), sp.end(), 0.0) /
                       static_cast<double>(sp.size());
    }
  }
  L.nll /= static_cast<double>(batch.size());
  if (n_samples) L.reward_loss /= static_cast<double>(n_samples);
  L.total = beta * L.nll + L.reward_loss;
  return L;
}

/// Adds the gradient of align_objective into the parameter buffers and
/// returns its value. Samples with zero weight are not back-propagated, so a
/// batch without reward leaves exactly beta times the supervised gradient.
template <typename T>
AlignLoss accumulate_align_gradient(const Seq2Seq<T>& model, const std::vector<AlignExample>& batch,
                                    double beta) {
  if (batch.empty()) throw Error("accumulate_align_gradient: empty batch");
  std::size_t n_samples = 0;
  for (const auto& ex : batch) n_samples += ex.samples.size();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double inv_s = n_samples ? 1.0 / static_cast<double>(n_samples) : 0.0;

  AlignLoss L;
  for (const auto& ex : batch) {
    const double m = static_cast<double>(ex.ref.size() + 1);
    const double lp = backprop_sequence(model, ex.src, ex.ref, beta * inv_b / m);
    L.nll -= lp / m;
    for (const auto& s : ex.samples) {
      if (s.weight == 0.0) continue;
      const double ms = static_cast<double>(s.ids.size() + 1);
      const double sp = backprop_sequence(model, ex.src, s.ids, s.weight * inv_s / ms);
      L.reward_loss -= s.weight * sp / ms;
    }
  }
  L.nll *= inv_b;
  L.reward_loss *= inv_s;
  L.total = beta * L.nll + L.reward_loss;
  return L;
}

template <typename T>
struct AlignResult {
  std::vector<Checkpoint<T>> checkpoints;  // step 0 is the base model
  std::vector<AlignStepLog> logs;
  std::vector<std::string> warnings;
  bool aborted = false;
};

/// Hooks into the loop; both optional.
template <typename T>
struct AlignCallbacks {
  std::function<void(const AlignStepLog&)> on_step;
  std::function<void(const Checkpoint<T>&)> on_checkpoint;
};

/// Fine-tunes `model` in place. Each step draws a minibatch of pairs, samples
/// translations, scores them, and takes one clipped AdamW step on
/// beta * L_nl + L_rw. A checkpoint is kept every checkpoint_interval steps and
/// at the last step. Samples that hit the length budget without EOS get zero
/// weight. A full epoch with zero mean reward adds a warning and training
/// continues; a non-finite loss or parameter restores the last checkpoint and
/// stops with aborted set.
template <typename T>
AlignResult<T> align_train(Seq2Seq<T>& model, const std::vector<ParallelPair>& pairs,
                           const NaturalnessScorer& clf, const ContentScorer& scorer,
                           const AlignConfig& cfg, const AlignCallbacks<T>& cb = {}) {
  cfg.validate();
  if (!model.trained()) throw Error("align_train: the base model has not been trained");
  if (pairs.empty()) throw Error("align_train: no training pairs");
  if (clf.perspective() != cfg.perspective)
    throw ConfigError("align.perspective", "classifier was trained for " +
                                               std::string(to_string(clf.perspective())));

  std::vector<std::vector<int>> src_ids, ref_ids;
  for (const auto& p : pairs) {
    src_ids.push_back(model.encode_source(p.source));
    ref_ids.push_back(model.encode_target(p.target));
  }

  Rng rng(cfg.seed);
  Rng order_rng = rng.fork(1);
  Rng sample_rng = rng.fork(2);
  AdamW<T> opt(model.parameters(), {.weight_decay = cfg.weight_decay});
  const LearningRateSchedule sched{cfg.lr, cfg.warmup, 0, cfg.lr};

  AlignResult<T> result;
  auto keep = [&](long step) {
    result.checkpoints.push_back(
        {model, step, std::numeric_limits<double>::quiet_NaN(), model.config().hash()});
    if (cb.on_checkpoint) cb.on_checkpoint(result.checkpoints.back());
  };
  keep(0);

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  order_rng.shuffle(order);
  std::size_t cursor = 0;
  const long steps_per_epoch =
      static_cast<long>((pairs.size() + static_cast<std::size_t>(cfg.batch) - 1) /
                        static_cast<std::size_t>(cfg.batch));
  long zero_reward_steps = 0;
  double baseline = 0.0;
  bool baseline_init = false;

  model.zero_grad();
  for (long step = 1; step <= cfg.max_steps; ++step) {
    std::vector<AlignExample> batch;
    AlignStepLog log;
    log.step = step;
    std::size_t n = 0;
    std::vector<bool> usable;
    for (int b = 0; b < cfg.batch; ++b) {
      if (cursor == order.size()) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      const std::size_t j = order[cursor++];
      AlignExample ex{src_ids[j], ref_ids[j], {}};
      for (int k = 0; k < cfg.samples_per_source; ++k) {
        IncrementalDecoder<T> dec(model, src_ids[j]);
        const auto s = sample_sequence(dec, sample_rng, cfg.temperature, cfg.top_k);
        const Sentence hyp = sentence_from_tokens(model.target_vocab().decode(s.tokens));
        const auto rw = compute_reward(
            clf.score(hyp), scorer.score(pairs[j].source, pairs[j].target, hyp), cfg.reward);
        log.r_t += rw.r_t;
        log.r_c += rw.r_c;
        log.r += rw.r;
        ++n;
        ex.samples.push_back({s.tokens, rw.r});
        usable.push_back(!s.truncated);
      }
      batch.push_back(std::move(ex));
    }
    log.r_t /= static_cast<double>(n);
    log.r_c /= static_cast<double>(n);
    log.r /= static_cast<double>(n);

    // The baseline used at this step is the average of earlier steps only.
    const double b = cfg.baseline && baseline_init ? baseline : 0.0;
    std::size_t k = 0;
    for (auto& ex : batch)
      for (auto& smp : ex.samples) smp.weight = usable[k++] ? smp.weight - b : 0.0;
    if (cfg.baseline) {
      baseline = baseline_init ? cfg.baseline_decay * baseline + (1.0 - cfg.baseline_decay) * log.r
                               : log.r;
      baseline_init = true;
    }

    try {
      const auto L = accumulate_align_gradient(model, batch, cfg.reward.beta);
      log.nll = L.nll;
      log.reward_loss = L.reward_loss;
      log.total = L.total;
      if (!std::isfinite(L.total)) throw NumericError("non-finite alignment loss");
      clip_gradients(model.parameters(), cfg.clip);
      opt.step(model.parameters(), sched.at(step - 1));
      model.zero_grad();
      model.check_finite();
    } catch (const NumericError& e) {
      result.aborted = true;
      result.warnings.push_back(std::string("aborted at step ") + std::to_string(step) + ": " +
                                e.what());
      model.copy_values_from(result.checkpoints.back().model);
      model.zero_grad();
      return result;
    }
    model.set_steps_trained(model.steps_trained() + 1);
    result.logs.push_back(log);
    if (cb.on_step) cb.on_step(log);

    zero_reward_steps = log.r == 0.0 ? zero_reward_steps + 1 : 0;
    if (zero_reward_steps == steps_per_epoch)
      result.warnings.push_back("reward collapse: mean reward 0 for a full epoch ending at step " +
                                std::to_string(step));
    if (zero_reward_steps >= steps_per_epoch) zero_reward_steps = 0;

    if (step % cfg.checkpoint_interval == 0 || step == cfg.max_steps) keep(step);
  }
  return result;
}

}  // namespace natalign

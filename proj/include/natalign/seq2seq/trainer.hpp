// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"
#include "natalign/corpus/types.hpp"
#include "natalign/seq2seq/checkpoint.hpp"
#include "natalign/seq2seq/model.hpp"
#include "natalign/seq2seq/optimizer.hpp"

namespace natalign {

struct TrainConfig {
  double max_lr = 1e-3;
  int warmup = 100;
  int batch = 32;
  int accum = 2;
  int eval_interval = 100;
  int patience = 3;
  int max_steps = 3000;
  double weight_decay = 0.01;
  double clip = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(max_lr > 0.0)) throw ConfigError("train.max_lr", "must be positive");
    if (warmup < 0) throw ConfigError("train.warmup", "must be >= 0");
    if (batch < 1) throw ConfigError("train.batch", "must be >= 1");
    if (accum < 1) throw ConfigError("train.accum", "must be >= 1");
    if (eval_interval < 1) throw ConfigError("train.eval_interval", "must be >= 1");
    if (patience < 1) throw ConfigError("train.patience", "must be >= 1");
    if (max_steps < 1) throw ConfigError("train.max_steps", "must be >= 1");
    if (weight_decay < 0.0) throw ConfigError("train.weight_decay", "must be >= 0");
    if (clip < 0.0) throw ConfigError("train.clip", "must be >= 0");
  }
};

/// Stops after `patience` consecutive evaluations without a strict
/// improvement over the best loss seen so far.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {
    if (patience < 1) throw ConfigError("train.patience", "must be >= 1");
  }

  /// Records one evaluation; returns true if it is a new best.
  bool observe(double loss) {
    ++evals_;
    if (loss < best_) {
      best_ = loss;
      best_eval_ = evals_ - 1;
      bad_ = 0;
      return true;
    }
    ++bad_;
    return false;
  }

  bool should_stop() const { return bad_ >= patience_; }
  double best() const { return best_; }
  /// Zero-based index of the best evaluation, -1 before any.
  int best_eval() const { return best_eval_; }
  int evaluations() const { return evals_; }

 private:
  int patience_;
  int evals_ = 0;
  int bad_ = 0;
  int best_eval_ = -1;
  double best_ = std::numeric_limits<double>::infinity();
};

struct EncodedPair {
  std::vector<int> src;
  std::vector<int> tgt;
};

template <typename T>
std::vector<EncodedPair> encode_pairs(const Seq2Seq<T>& model, const std::vector<ParallelPair>& pairs) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({model.encode_source(p.source), model.encode_target(p.target)});
  return out;
}

/// Mean per-pair token NLL.
template <typename T>
double mean_nll(const Seq2Seq<T>& model, const std::vector<EncodedPair>& data) {
  if (data.empty()) throw Error("mean_nll over an empty set");
  double s = 0.0;
  for (const auto& d : data) {
    const auto lp = token_log_probs(model, d.src, d.tgt);
    s -= std::accumulate(lp.begin(), lp.end(), 0.0) / static_cast<double>(lp.size());
  }
  return s / static_cast<double>(data.size());
}

struct EvalRecord {
  long step = 0;
  double train_loss = 0.0;  // mean over steps since the previous evaluation
  double valid_loss = 0.0;
};

template <typename T>
struct TrainResult {
  Checkpoint<T> best;
  std::vector<EvalRecord> history;
  bool early_stopped = false;
  bool diverged = false;
};

/// Supervised NLL training. Each optimizer step averages the per-token NLL
/// over batch * accum sequences, clips, and applies AdamW under warmup +
/// cosine decay. Validation runs every eval_interval steps; the returned
/// checkpoint is the best one by validation loss. On NaN/Inf the run aborts
/// and returns the last finite best checkpoint with diverged set.
template <typename T>
TrainResult<T> train_supervised(Seq2Seq<T>& model, const std::vector<EncodedPair>& train,
                                const std::vector<EncodedPair>& valid, const TrainConfig& cfg,
                                const std::function<void(const EvalRecord&)>& on_eval = {}) {
  cfg.validate();
  if (train.empty()) throw Error("train_supervised: empty training set");
  if (valid.empty()) throw Error("train_supervised: empty validation set");

  Rng rng(cfg.seed);
  AdamW<T> opt(model.parameters(), {.weight_decay = cfg.weight_decay});
  const LearningRateSchedule sched{cfg.max_lr, cfg.warmup, cfg.max_steps, 0.0};
  EarlyStopping stopper(cfg.patience);

  TrainResult<T> result;
  result.best = make_checkpoint(model, std::numeric_limits<double>::infinity());

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::size_t cursor = 0;
  auto next_example = [&]() -> const EncodedPair& {
    if (cursor == order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    return train[order[cursor++]];
  };

  const int per_step = cfg.batch * cfg.accum;
  double train_sum = 0.0;
  int train_count = 0;
  model.zero_grad();
  for (int step = 0; step < cfg.max_steps; ++step) {
    double step_loss = 0.0;
    try {
      for (int i = 0; i < per_step; ++i) {
        const auto& ex = next_example();
        const double m = static_cast<double>(ex.tgt.size() + 1);
        const double lp = backprop_sequence(model, ex.src, ex.tgt, 1.0 / (m * per_step));
        step_loss -= lp / m;
      }
      step_loss /= per_step;
      if (!std::isfinite(step_loss)) throw NumericError("non-finite training loss");
      clip_gradients(model.parameters(), cfg.clip);
      opt.step(model.parameters(), sched.at(step));
      model.zero_grad();
      model.check_finite();
    } catch (const NumericError&) {
      result.diverged = true;
      model.copy_values_from(result.best.model);
      model.zero_grad();
      return result;
    }
    model.set_steps_trained(model.steps_trained() + 1);
    train_sum += step_loss;
    ++train_count;

    const bool last = step + 1 == cfg.max_steps;
    if ((step + 1) % cfg.eval_interval == 0 || last) {
      EvalRecord rec{model.steps_trained(), train_sum / train_count, mean_nll(model, valid)};
      train_sum = 0.0;
      train_count = 0;
      result.history.push_back(rec);
      if (!std::isfinite(rec.valid_loss)) {
        result.diverged = true;
        model.copy_values_from(result.best.model);
        return result;
      }
      if (stopper.observe(rec.valid_loss)) result.best = make_checkpoint(model, rec.valid_loss);
      if (on_eval) on_eval(rec);
      if (stopper.should_stop()) {
        result.early_stopped = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace natalign

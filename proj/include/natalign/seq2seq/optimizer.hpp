// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "natalign/core/error.hpp"
#include "natalign/seq2seq/autodiff.hpp"

namespace natalign {

/// Linear warmup to max_lr, then cosine decay to min_lr at total_steps.
/// total_steps <= 0 keeps the rate constant after warmup.
struct LearningRateSchedule {
  double max_lr = 1e-3;
  int warmup = 100;
  int total_steps = 0;
  double min_lr = 0.0;

  double at(long step) const {
    if (warmup > 0 && step < warmup)
      return max_lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
    if (total_steps <= warmup) return max_lr;
    const double progress = std::min(
        1.0, static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup));
    return min_lr + 0.5 * (max_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
  }
};

/// Global L2 norm over all gradient buffers, accumulated in double.
template <typename T>
double gradient_norm(const std::vector<Parameter<T>>& params) {
  double s = 0.0;
  for (const auto& p : params)
    if (p.grad.size()) s += p.grad.template cast<double>().squaredNorm();
  return std::sqrt(s);
}

/// Rescales gradients so their global norm is at most max_norm. Returns the
/// norm before clipping.
template <typename T>
double clip_gradients(std::vector<Parameter<T>>& params, double max_norm) {
  const double norm = gradient_norm(params);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) {
    const T f = static_cast<T>(max_norm / norm);
    for (auto& p : params)
      if (p.grad.size()) p.grad *= f;
  }
  return norm;
}

/// Adam with decoupled weight decay. Decay applies to weight matrices only;
/// biases, norm gains and other row vectors are left alone.
template <typename T>
class AdamW {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-9;
    double weight_decay = 0.01;
  };

  AdamW() = default;
  explicit AdamW(const std::vector<Parameter<T>>& params, Options opt = {}) : opt_(opt) {
    for (const auto& p : params) {
      m_.push_back(Matrix<T>::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix<T>::Zero(p.value.rows(), p.value.cols()));
    }
  }

  long steps() const { return t_; }

  void step(std::vector<Parameter<T>>& params, double lr) {
    if (params.size() != m_.size()) throw Error("optimizer/parameter layout mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(opt_.beta1), b2 = static_cast<T>(opt_.beta2);
    const T step_size = static_cast<T>(lr / bc1);
    const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
    const T eps = static_cast<T>(opt_.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      if (p.grad.size() == 0) continue;
      if (opt_.weight_decay > 0.0 && p.value.rows() > 1)
        p.value *= static_cast<T>(1.0 - lr * opt_.weight_decay);
      m_[i] = b1 * m_[i] + (T(1) - b1) * p.grad;
      v_[i] = b2 * v_[i] + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -=
          step_size * m_[i].array() / ((v_[i].array().sqrt() * inv_sqrt_bc2) + eps);
    }
  }

 private:
  Options opt_;
  long t_ = 0;
  std::vector<Matrix<T>> m_;
  std::vector<Matrix<T>> v_;
};

}  // namespace natalign

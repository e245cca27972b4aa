// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "natalign/seq2seq/model.hpp"

namespace natalign {

/// Step-by-step decoder over one encoded source, caching self-attention keys
/// and values so each step costs O(position) instead of re-running the prefix.
/// Satisfies the DecodingModel concept used by the search routines.
template <typename T>
class IncrementalDecoder {
 public:
  struct State {
    std::vector<Matrix<T>> keys;    // per layer, position x width
    std::vector<Matrix<T>> values;  // per layer, position x width
    int position = 0;
    std::vector<double> next_log_probs;
  };

  IncrementalDecoder(const Seq2Seq<T>& model, const std::vector<int>& src_ids)
      : model_(&model),
        max_steps_(std::min(model.max_output_steps(), 2 * static_cast<int>(src_ids.size()) + 10)) {
    ad::Tape<T> tape(false);
    const Matrix<T> memory = model.encode(tape, src_ids).value();
    for (const auto& L : model.decoder_layers()) {
      cross_keys_.push_back(affine(memory, L.cross_attn.wk, L.cross_attn.bk));
      cross_values_.push_back(affine(memory, L.cross_attn.wv, L.cross_attn.bv));
    }
  }

  int bos() const { return Vocabulary::kBos; }
  int eos() const { return Vocabulary::kEos; }
  /// Output budget: twice the source length plus slack, capped by max_len.
  int max_steps() const { return max_steps_; }

  State initial_state() const {
    State s;
    s.keys.resize(cross_keys_.size());
    s.values.resize(cross_keys_.size());
    const int d = model_->config().width;
    for (std::size_t l = 0; l < s.keys.size(); ++l) {
      s.keys[l].resize(0, d);
      s.values[l].resize(0, d);
    }
    step(s, bos());
    return s;
  }

  State advance(const State& s, int token) const {
    State n = s;
    step(n, token);
    return n;
  }

  /// In-place variant for callers that do not need the old state.
  void advance_in_place(State& s, int token) const { step(s, token); }

  const std::vector<double>& next_log_probs(const State& s) const { return s.next_log_probs; }

 private:
  Matrix<T> affine(const Matrix<T>& x, int w, int b) const {
    Matrix<T> y = x * model_->value(w);
    y.rowwise() += model_->value(b).row(0);
    return y;
  }

  Matrix<T> layer_norm(const Matrix<T>& x, detail::NormParams n) const {
    const T mean = x.row(0).mean();
    const T var = (x.row(0).array() - mean).square().mean();
    const T inv_std = T(1) / std::sqrt(var + T(1e-5));
    Matrix<T> y = ((x.array() - mean) * inv_std).matrix();
    y = (y.array() * model_->value(n.gain).array()).matrix() + model_->value(n.bias);
    return y;
  }

  Matrix<T> attend(const Matrix<T>& q, const Matrix<T>& keys, const Matrix<T>& values) const {
    const int heads = model_->config().heads;
    const int dk = model_->config().width / heads;
    const T inv_sqrt_dk = T(1) / std::sqrt(static_cast<T>(dk));
    Matrix<T> out(1, model_->config().width);
    for (int h = 0; h < heads; ++h) {
      Matrix<T> scores = q.middleCols(h * dk, dk) * keys.middleCols(h * dk, dk).transpose();
      scores *= inv_sqrt_dk;
      const T mx = scores.maxCoeff();
      Matrix<T> p = (scores.array() - mx).exp().matrix();
      p /= p.sum();
      out.middleCols(h * dk, dk) = p * values.middleCols(h * dk, dk);
    }
    return out;
  }

  void step(State& s, int token) const {
    const auto& m = *model_;
    if (s.position >= m.config().max_len) throw Error("decoder position exceeds max_len");
    Matrix<T> x = m.value(m.target_embedding_index()).row(token) * m.embed_scale() +
                  m.positions().row(s.position);
    const auto& layers = m.decoder_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      Matrix<T> h = layer_norm(x, L.norm1);
      Matrix<T> q = affine(h, L.self_attn.wq, L.self_attn.bq);
      auto& K = s.keys[l];
      auto& V = s.values[l];
      K.conservativeResize(K.rows() + 1, Eigen::NoChange);
      V.conservativeResize(V.rows() + 1, Eigen::NoChange);
      K.row(K.rows() - 1) = affine(h, L.self_attn.wk, L.self_attn.bk);
      V.row(V.rows() - 1) = affine(h, L.self_attn.wv, L.self_attn.bv);
      x += affine(attend(q, K, V), L.self_attn.wo, L.self_attn.bo);

      h = layer_norm(x, L.norm2);
      q = affine(h, L.cross_attn.wq, L.cross_attn.bq);
      x += affine(attend(q, cross_keys_[l], cross_values_[l]), L.cross_attn.wo, L.cross_attn.bo);

      h = layer_norm(x, L.norm3);
      Matrix<T> f = affine(h, L.ffn.w1, L.ffn.b1);
      const T inv_sqrt2 = T(1) / std::sqrt(T(2));
      f = f.unaryExpr([inv_sqrt2](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); });
      x += affine(f, L.ffn.w2, L.ffn.b2);
    }
    x = layer_norm(x, m.decoder_norm());
    Matrix<T> logits = affine(x, m.output_weight_index(), m.output_bias_index()) + m.output_mask();
    // Same arithmetic as ad::cross_entropy so both paths agree bit-for-bit
    // up to matmul blocking.
    const T mx = logits.maxCoeff();
    const T z = (logits.array() - mx).exp().sum();
    const T log_z = std::log(z);
    s.next_log_probs.resize(static_cast<std::size_t>(logits.cols()));
    for (Eigen::Index i = 0; i < logits.cols(); ++i)
      s.next_log_probs[static_cast<std::size_t>(i)] = static_cast<double>(logits(0, i) - mx - log_z);
    ++s.position;
  }

  const Seq2Seq<T>* model_;
  int max_steps_;
  std::vector<Matrix<T>> cross_keys_;
  std::vector<Matrix<T>> cross_values_;
};

}  // namespace natalign

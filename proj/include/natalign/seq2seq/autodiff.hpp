// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// A Tape records every op of one forward pass as a node holding its value and
// a backward closure. Nodes are appended in topological order, so backward()
// is a single reverse sweep. Parameters enter the tape as leaves that refer
// to the parameter storage and add their gradient into Parameter::grad.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "natalign/core/error.hpp"

namespace natalign {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  /// Accumulated by recording tapes; mutable so const models can be
  /// differentiated.
  mutable Matrix<T> grad;
};

namespace ad {

template <typename T>
class Tape;

/// Handle to a node on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Matrix<T>& value() const { return tape->value(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, int)>;

  /// With record == false no closures are kept; the tape is a plain
  /// evaluator and backward() is unavailable.
  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  const Matrix<T>& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external ? *n.external : n.value;
  }

  /// Gradient buffer of a node, zero-initialized on first access.
  Matrix<T>& grad(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad) {
      const auto& v = value(id);
      n.grad.setZero(v.rows(), v.cols());
      n.has_grad = true;
    }
    return n.grad;
  }

  Var<T> push(Matrix<T> v, Backward bw = {}) {
    Node n;
    n.value = std::move(v);
    if (record_) n.backward = std::move(bw);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  /// Leaf bound to a parameter; its gradient is added into p.grad.
  Var<T> leaf(const Parameter<T>& p) {
    Node n;
    n.external = &p.value;
    if (record_) {
      const Parameter<T>* target = &p;
      n.backward = [target](Tape& t, int self) {
        if (target->grad.size() == 0)
          target->grad.setZero(target->value.rows(), target->value.cols());
        target->grad += t.grad(self);
      };
    }
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  /// Constant leaf (no gradient).
  Var<T> constant(Matrix<T> v) { return push(std::move(v)); }

  /// Backpropagate from a 1x1 node, seeding d(root)/d(root) = scale.
  void backward(Var<T> root, T scale = T(1)) {
    if (!record_) throw Error("backward() on a non-recording tape");
    if (root.rows() != 1 || root.cols() != 1)
      throw Error("backward() root must be a scalar node");
    grad(root.id)(0, 0) += scale;
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.has_grad && n.backward) n.backward(*this, i);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix<T> value;
    const Matrix<T>* external = nullptr;
    Matrix<T> grad;
    bool has_grad = false;
    Backward backward;
  };

  bool record_;
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Ops. Every op reads its inputs' values at construction and captures the
// input ids for the backward sweep.

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value() * b.value();
  return t.push(std::move(v), [ai = a.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    t.grad(ai).noalias() += g * t.value(bi).transpose();
    t.grad(bi).noalias() += t.value(ai).transpose() * g;
  });
}

/// a * b^T
template <typename T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value() * b.value().transpose();
  return t.push(std::move(v), [ai = a.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    t.grad(ai).noalias() += g * t.value(bi);
    t.grad(bi).noalias() += g.transpose() * t.value(ai);
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value() + b.value();
  return t.push(std::move(v), [ai = a.id, bi = b.id](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    t.grad(ai) += g;
    t.grad(bi) += g;
  });
}

/// a + broadcast(row), row is 1 x cols(a).
template <typename T>
Var<T> add_row(Var<T> a, Var<T> row) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value().rowwise() + row.value().row(0);
  return t.push(std::move(v), [ai = a.id, ri = row.id](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    t.grad(ai) += g;
    t.grad(ri) += g.colwise().sum();
  });
}

template <typename T>
Var<T> add_constant(Var<T> a, const Matrix<T>& c) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value() + c;
  return t.push(std::move(v), [ai = a.id](Tape<T>& t, int self) {
    t.grad(ai) += t.grad(self);
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value() * s;
  return t.push(std::move(v), [ai = a.id, s](Tape<T>& t, int self) {
    t.grad(ai) += t.grad(self) * s;
  });
}

/// Exact GELU, x * Phi(x).
template <typename T>
Var<T> gelu(Var<T> a) {
  Tape<T>& t = *a.tape;
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  Matrix<T> v = a.value().unaryExpr([inv_sqrt2](T x) {
    return T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2));
  });
  return t.push(std::move(v), [ai = a.id, inv_sqrt2](Tape<T>& t, int self) {
    const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
    Matrix<T> d = t.value(ai).unaryExpr([&](T x) {
      return T(0.5) * (T(1) + std::erf(x * inv_sqrt2)) +
             x * inv_sqrt2pi * std::exp(T(-0.5) * x * x);
    });
    t.grad(ai) += t.grad(self).cwiseProduct(d);
  });
}

/// Row-wise layer normalization with learned gain and bias (1 x cols).
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5)) {
  Tape<T>& t = *x.tape;
  const Matrix<T>& xv = x.value();
  const Eigen::Index n = xv.rows(), d = xv.cols();
  Matrix<T> xhat(n, d);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mean = xv.row(i).mean();
    const T var = (xv.row(i).array() - mean).square().mean();
    inv_std(i) = T(1) / std::sqrt(var + eps);
    xhat.row(i) = (xv.row(i).array() - mean) * inv_std(i);
  }
  Matrix<T> v = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  v.rowwise() += bias.value().row(0);
  return t.push(std::move(v), [xi = x.id, gi = gain.id, bi = bias.id,
                               xhat = std::move(xhat),
                               inv_std = std::move(inv_std)](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    t.grad(bi) += g.colwise().sum();
    t.grad(gi) += g.cwiseProduct(xhat).colwise().sum();
    const auto gain_row = t.value(gi).row(0).array();
    Matrix<T>& gx = t.grad(xi);
    for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
      Eigen::Array<T, 1, Eigen::Dynamic> gh = g.row(i).array() * gain_row;
      const T mean_gh = gh.mean();
      const T mean_gh_xhat = (gh * xhat.row(i).array()).mean();
      gx.row(i).array() +=
          inv_std(i) * (gh - mean_gh - xhat.row(i).array() * mean_gh_xhat);
    }
  });
}

/// Row-wise softmax. With `causal`, entry (i, j) is masked for j > i.
template <typename T>
Var<T> softmax_rows(Var<T> a, bool causal) {
  Tape<T>& t = *a.tape;
  const Matrix<T>& av = a.value();
  Matrix<T> p = Matrix<T>::Zero(av.rows(), av.cols());
  for (Eigen::Index i = 0; i < av.rows(); ++i) {
    const Eigen::Index width = causal ? std::min<Eigen::Index>(i + 1, av.cols()) : av.cols();
    const auto row = av.row(i).head(width);
    const T mx = row.maxCoeff();
    auto e = (row.array() - mx).exp();
    p.row(i).head(width) = e / e.sum();
  }
  return t.push(std::move(p), [ai = a.id](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    const Matrix<T>& pv = t.value(self);
    // dL/da = p * (g - sum(g * p)) per row; masked entries have p = 0.
    Eigen::Matrix<T, Eigen::Dynamic, 1> dot = g.cwiseProduct(pv).rowwise().sum();
    t.grad(ai).array() += pv.array() * (g.array().colwise() - dot.array());
  });
}

template <typename T>
Var<T> columns(Var<T> a, Eigen::Index start, Eigen::Index count) {
  Tape<T>& t = *a.tape;
  Matrix<T> v = a.value().middleCols(start, count);
  return t.push(std::move(v), [ai = a.id, start, count](Tape<T>& t, int self) {
    t.grad(ai).middleCols(start, count) += t.grad(self);
  });
}

template <typename T>
Var<T> hconcat(const std::vector<Var<T>>& parts) {
  Tape<T>& t = *parts.front().tape;
  Eigen::Index rows = parts.front().rows(), cols = 0;
  for (const auto& p : parts) cols += p.cols();
  Matrix<T> v(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    spans.emplace_back(p.id, off);
    off += p.cols();
  }
  return t.push(std::move(v), [spans = std::move(spans)](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    for (auto [id, o] : spans) {
      Matrix<T>& gi = t.grad(id);
      gi += g.middleCols(o, gi.cols());
    }
  });
}

/// Gather rows of an embedding table.
template <typename T>
Var<T> embedding(Var<T> table, const std::vector<int>& ids) {
  Tape<T>& t = *table.tape;
  const Matrix<T>& tv = table.value();
  Matrix<T> v(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.rows()) throw Error("embedding id out of range");
    v.row(static_cast<Eigen::Index>(i)) = tv.row(ids[i]);
  }
  return t.push(std::move(v), [ti = table.id, ids](Tape<T>& t, int self) {
    const Matrix<T>& g = t.grad(self);
    Matrix<T>& gt = t.grad(ti);
    for (std::size_t i = 0; i < ids.size(); ++i)
      gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

/// Weighted token cross-entropy: sum_i w_i * -log softmax(logits_i)[target_i].
/// Returns a 1x1 node. `log_probs_out`, when given, receives the per-row log
/// probability of each target.
template <typename T>
Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets,
                     const std::vector<T>& weights,
                     std::vector<T>* log_probs_out = nullptr) {
  Tape<T>& t = *logits.tape;
  const Matrix<T>& lv = logits.value();
  if (static_cast<std::size_t>(lv.rows()) != targets.size() ||
      targets.size() != weights.size())
    throw Error("cross_entropy: shape mismatch");
  Matrix<T> probs(lv.rows(), lv.cols());
  T loss = 0;
  if (log_probs_out) log_probs_out->assign(targets.size(), T(0));
  for (Eigen::Index i = 0; i < lv.rows(); ++i) {
    const T mx = lv.row(i).maxCoeff();
    auto e = (lv.row(i).array() - mx).exp();
    const T z = e.sum();
    probs.row(i) = e / z;
    const T lp = lv(i, targets[static_cast<std::size_t>(i)]) - mx - std::log(z);
    if (log_probs_out) (*log_probs_out)[static_cast<std::size_t>(i)] = lp;
    loss -= weights[static_cast<std::size_t>(i)] * lp;
  }
  Matrix<T> v(1, 1);
  v(0, 0) = loss;
  return t.push(std::move(v), [li = logits.id, targets, weights,
                               probs = std::move(probs)](Tape<T>& t, int self) {
    const T g = t.grad(self)(0, 0);
    Matrix<T>& gl = t.grad(li);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const T w = g * weights[static_cast<std::size_t>(i)];
      if (w == T(0)) continue;
      gl.row(i) += w * probs.row(i);
      gl(i, targets[static_cast<std::size_t>(i)]) -= w;
    }
  });
}

}  // namespace ad
}  // namespace natalign

// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "natalign/classifier/features.hpp"
#include "natalign/core/error.hpp"
#include "natalign/core/random.hpp"
#include "natalign/corpus/types.hpp"

namespace natalign {

/// p(t1 | sentence) for one perspective. Anything that can score sentences
/// this way (a stronger model, a fixed test double) can stand in for the
/// n-gram classifier in rewards and evaluation.
class NaturalnessScorer {
 public:
  virtual ~NaturalnessScorer() = default;
  virtual double score(const Sentence& s) const = 0;
  virtual Perspective perspective() const = 0;

  /// p(t0 | s) = 1 - p(t1 | s).
  double complement(const Sentence& s) const { return 1.0 - score(s); }
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Logistic regression over hashed n-gram features.
class NaturalnessClassifier : public NaturalnessScorer {
 public:
  NaturalnessClassifier() = default;
  NaturalnessClassifier(Perspective p, FeatureSpec spec)
      : perspective_(p), spec_(spec), weights_(spec.dimension(), 0.0) {
    spec_.validate();
  }

  double score(const Sentence& s) const override { return sigmoid(margin(featurize(s, spec_))); }
  Perspective perspective() const override { return perspective_; }

  double margin(const SparseVector& x) const {
    double z = bias_;
    for (const auto& [i, v] : x) z += weights_[i] * v;
    return z;
  }

  const FeatureSpec& spec() const { return spec_; }
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }

  bool operator==(const NaturalnessClassifier& o) const {
    return perspective_ == o.perspective_ && spec_ == o.spec_ && weights_ == o.weights_ &&
           bias_ == o.bias_;
  }

 private:
  Perspective perspective_ = Perspective::kMtHt;
  FeatureSpec spec_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

struct ClassifierTrainOptions {
  double reg = 1e-4;     // L2 strength on the weights (bias unpenalized)
  double lr = 0.5;
  int epochs = 20;
  int batch = 16;
  std::uint64_t seed = 1;

  void validate() const {
    if (reg < 0.0) throw ConfigError("classifier.reg", "must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("classifier.lr", "must be positive");
    if (epochs < 1) throw ConfigError("classifier.epochs", "must be >= 1");
    if (batch < 1) throw ConfigError("classifier.batch", "must be >= 1");
  }
};

struct TrainedClassifier {
  NaturalnessClassifier classifier;
  double training_accuracy = 0.0;
  double final_loss = 0.0;  // mean logistic loss + penalty on the training set
};

/// Minimizes mean logistic loss + (reg/2)|w|^2 by seeded mini-batch
/// gradient descent. The L2 term is applied as an exact proximal shrink,
/// w <- (w - lr*g) / (1 + lr*reg), stored as a lazy global scale so each
/// step only touches the features present in the batch.
inline TrainedClassifier train_classifier(const LabeledSet& data, Perspective perspective,
                                          const FeatureSpec& spec,
                                          const ClassifierTrainOptions& opt = {}) {
  opt.validate();
  std::size_t pos = 0;
  for (const auto& x : data) pos += x.label == 1;
  if (pos == 0 || pos == data.size())
    throw DataError("train_classifier: data must contain both labels");

  NaturalnessClassifier clf(perspective, spec);
  std::vector<SparseVector> feats;
  feats.reserve(data.size());
  for (const auto& x : data) feats.push_back(featurize(x.text, spec));

  std::vector<double>& w = clf.weights();  // true weights = scale * w
  double scale = 1.0, bias = 0.0;
  const double shrink = 1.0 + opt.lr * opt.reg;
  Rng rng(opt.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      const double inv_b = 1.0 / static_cast<double>(end - start);
      // Residuals are computed before any update so the step is a true
      // mini-batch gradient.
      std::vector<double> resid(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t j = order[k];
        double z = bias;
        for (const auto& [i, v] : feats[j]) z += scale * w[i] * v;
        resid[k - start] = sigmoid(z) - static_cast<double>(data[j].label);
      }
      double gb = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const double r = resid[k - start] * inv_b;
        gb += r;
        for (const auto& [i, v] : feats[order[k]]) w[i] -= opt.lr * r * v / scale;
      }
      bias -= opt.lr * gb;
      scale /= shrink;
      if (scale < 1e-150) {
        for (double& x : w) x *= scale;
        scale = 1.0;
      }
    }
  }
  for (double& x : w) x *= scale;
  clf.set_bias(bias);

  TrainedClassifier out;
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double z = clf.margin(feats[j]);
    const int y = data[j].label;
    correct += (sigmoid(z) >= 0.5 ? 1 : 0) == y;
    // log(1 + exp(-s z)) with s = +-1, computed stably.
    const double m = y == 1 ? z : -z;
    loss += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  double sq = 0.0;
  for (double x : w) sq += x * x;
  out.training_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  out.final_loss = loss / static_cast<double>(data.size()) + 0.5 * opt.reg * sq;
  out.classifier = std::move(clf);
  return out;
}

}  // namespace natalign

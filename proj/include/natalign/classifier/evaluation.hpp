// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iomanip>
#include <ostream>
#include <vector>

#include "natalign/classifier/classifier.hpp"

namespace natalign {

/// A score at or above the threshold predicts t1.
inline int predict_label(double score, double threshold = 0.5) { return score >= threshold ? 1 : 0; }

struct ConfusionMatrix {
  // counts[true][predicted]
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
  double accuracy() const {
    return static_cast<double>(counts[0][0] + counts[1][1]) / static_cast<double>(total());
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion_matrix(const NaturalnessScorer& clf, const LabeledSet& test,
                                        double threshold = 0.5) {
  if (test.empty()) throw DataError("confusion_matrix: empty test set");
  ConfusionMatrix m;
  for (const auto& x : test) {
    if (x.label != 0 && x.label != 1) throw DataError("confusion_matrix: label must be 0 or 1");
    ++m.counts[static_cast<std::size_t>(x.label)][static_cast<std::size_t>(predict_label(clf.score(x.text), threshold))];
  }
  return m;
}

/// accuracy[i][j]: classifier i on the test set of perspective j, in
/// kAllPerspectives order.
using PerspectiveGrid = std::array<std::array<double, 3>, 3>;

inline PerspectiveGrid cross_perspective_grid(const std::array<const NaturalnessScorer*, 3>& classifiers,
                                              const std::array<LabeledSet, 3>& test_sets,
                                              double threshold = 0.5) {
  PerspectiveGrid g{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      g[i][j] = confusion_matrix(*classifiers[i], test_sets[j], threshold).accuracy();
  return g;
}

inline void write_confusion_tsv(std::ostream& os, const ConfusionMatrix& m, Perspective p) {
  const Provenance t1 = preferred(p), t0 = dispreferred(p);
  os << "true\\pred\t" << to_string(t0) << "\t" << to_string(t1) << "\n";
  os << to_string(t0) << "\t" << m.counts[0][0] << "\t" << m.counts[0][1] << "\n";
  os << to_string(t1) << "\t" << m.counts[1][0] << "\t" << m.counts[1][1] << "\n";
  os << "accuracy\t" << std::fixed << std::setprecision(4) << m.accuracy() << "\n";
}

inline void write_grid_tsv(std::ostream& os, const PerspectiveGrid& g) {
  os << "classifier\\test";
  for (auto p : kAllPerspectives) os << "\t" << to_string(p);
  os << "\n" << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < 3; ++i) {
    os << to_string(kAllPerspectives[i]);
    for (std::size_t j = 0; j < 3; ++j) os << "\t" << g[i][j];
    os << "\n";
  }
}

}  // namespace natalign

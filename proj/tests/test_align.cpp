// Copyright 2026 The natalign Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "gradcheck.hpp"
#include "model_fixtures.hpp"
#include "natalign/align/align.hpp"
#include "natalign/align/rerank.hpp"
#include "natalign/align/select.hpp"

namespace natalign {
namespace {

using testing::frozen_batch;
using testing::jitter;
using testing::oracle_objective;
using testing::symbols;

struct LambdaScorer : NaturalnessScorer {
  std::function<double(const Sentence&)> f;
  Perspective p = Perspective::kMtHt;
  explicit LambdaScorer(std::function<double(const Sentence&)> fn) : f(std::move(fn)) {}
  double score(const Sentence& s) const override { return f(s); }
  Perspective perspective() const override { return p; }
};

struct LambdaContent : ContentScorer {
  std::function<double(const Sentence&, const Sentence&)> f;
  explicit LambdaContent(std::function<double(const Sentence&, const Sentence&)> fn) : f(std::move(fn)) {}
  double score(const Sentence&, const Sentence& ref, const Sentence& hyp) const override { return f(ref, hyp); }
  std::string name() const override { return "lambda"; }
};

TEST(AlignGradient, RewardObjectiveMatchesCentralDifferences) {
  for (double beta : {0.0, 0.5}) {
    auto m = testing::tiny_model<double>(31);
    jitter(m, 32);
    ASSERT_LE(m.parameter_count(), 5000u);
    const auto batch = frozen_batch(m, 33, false);
    m.zero_grad();
    const auto L = accumulate_align_gradient(m, batch, beta);
    EXPECT_NEAR(L.total, oracle_objective(m, batch, beta), 1e-10);
    EXPECT_NEAR(align_objective(m, batch, beta).total, L.total, 1e-10);

    Rng rng(34);
    int probes = 0;
    double worst = 0;
    for (auto& p : m.parameters()) {
      const int n = p.value.size() > 100 ? 3 : 2;
      for (int k = 0; k < n; ++k, ++probes) {
        const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p.value.size())));
        double& w = p.value.data()[i];
        const double saved = w, h = 1e-5;
        w = saved + h;
        const double up = oracle_objective(m, batch, beta);
        w = saved - h;
        const double down = oracle_objective(m, batch, beta);
        w = saved;
        const double numeric = (up - down) / (2 * h);
        const double analytic = p.grad.data()[i];
        const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-7});
        worst = std::max(worst, rel);
        EXPECT_LE(rel, 1e-3) << p.name << " beta " << beta;
      }
    }
    EXPECT_GE(probes, 50);
    RecordProperty("max_relative_error_beta_" + std::to_string(beta), std::to_string(worst));
  }
}

TEST(AlignGradient, ZeroRewardsLeaveHalfTheSupervisedGradient) {
  auto m = testing::tiny_model<double>(41);
  jitter(m, 42);
  const auto batch = frozen_batch(m, 43, true);
  m.zero_grad();
  for (const auto& ex : batch)
    backprop_sequence(m, ex.src, ex.ref, 1.0 / (static_cast<double>(ex.ref.size() + 1) * batch.size()));
  std::vector<Matrix<double>> supervised;
  for (const auto& p : m.parameters()) supervised.push_back(p.grad);

  m.zero_grad();
  const auto L = accumulate_align_gradient(m, batch, 0.5);
  EXPECT_EQ(L.reward_loss, 0.0);
  for (std::size_t i = 0; i < supervised.size(); ++i)
    EXPECT_LE((m.parameters()[i].grad - 0.5 * supervised[i]).cwiseAbs().maxCoeff(), 1e-14)
        << m.parameters()[i].name;

  m.zero_grad();
  accumulate_align_gradient(m, batch, 0.0);
  for (const auto& p : m.parameters()) EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0) << p.name;
}

std::vector<ParallelPair> toy_pairs(int n) {
  std::vector<ParallelPair> out;
  for (int i = 0; i < n; ++i)
    out.push_back({symbols({i % 6, (i + 2) % 6}), symbols({i % 6, (i + 2) % 6}, "t"), "b" + std::to_string(i % 2)});
  return out;
}

Seq2Seq<float> trained_tiny(std::uint64_t seed) {
  auto m = testing::tiny_model<float>(seed);
  jitter(m, seed + 1, 0.2);
  m.set_steps_trained(1);
  return m;
}

TEST(AlignTrain, LogsDecomposeAndCheckpointsFollowInterval) {
  auto model = trained_tiny(51);
  LambdaScorer clf([](const Sentence& s) { return s.size() % 2 ? 0.8 : 0.3; });
  LambdaContent content([](const Sentence&, const Sentence& h) { return h.size() <= 3 ? 0.9 : 0.2; });
  AlignConfig cfg;
  cfg.batch = 4;
  cfg.max_steps = 7;
  cfg.checkpoint_interval = 3;
  cfg.reward.beta = 0.5;
  std::vector<long> seen;
  AlignCallbacks<float> cb;
  cb.on_checkpoint = [&](const Checkpoint<float>& c) { seen.push_back(c.step); };
  const auto r = align_train(model, toy_pairs(10), clf, content, cfg, cb);
  ASSERT_EQ(r.logs.size(), 7u);
  for (const auto& l : r.logs) {
    EXPECT_NEAR(l.total, 0.5 * l.nll + l.reward_loss, 1e-9);
    EXPECT_GE(l.r, 0.0);
    EXPECT_LE(l.r, 1.0);
  }
  EXPECT_EQ(seen, (std::vector<long>{0, 3, 6, 7}));
  ASSERT_EQ(r.checkpoints.size(), 4u);
  EXPECT_FALSE(r.aborted);

  std::ostringstream os;
  write_step_log_header(os);
  write_step_log(os, r.logs[0]);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "step\tr_t\tr_c\tr\tnll\treward_loss\ttotal");
}

TEST(AlignTrain, DeterministicForSeed) {
  LambdaScorer clf([](const Sentence& s) { return s.size() % 2 ? 0.8 : 0.3; });
  ChrfScorer chrf;
  AlignConfig cfg;
  cfg.batch = 4;
  cfg.max_steps = 5;
  cfg.reward.sigma_c = 0.1;
  auto a = trained_tiny(61), b = trained_tiny(61);
  const auto ra = align_train(a, toy_pairs(8), clf, chrf, cfg);
  const auto rb = align_train(b, toy_pairs(8), clf, chrf, cfg);
  ASSERT_EQ(ra.logs.size(), rb.logs.size());
  for (std::size_t i = 0; i < ra.logs.size(); ++i) {
    EXPECT_EQ(ra.logs[i].total, rb.logs[i].total);
    EXPECT_EQ(ra.logs[i].r, rb.logs[i].r);
  }
  for (std::size_t i = 0; i < a.parameters().size(); ++i)
    EXPECT_EQ(a.parameters()[i].value, b.parameters()[i].value);
}

TEST(AlignTrain, ZeroRewardEpochWarnsAndContinues) {
  auto model = trained_tiny(71);
  LambdaScorer clf([](const Sentence&) { return 0.1; });  // below sigma_t
  ChrfScorer chrf;
  AlignConfig cfg;
  cfg.batch = 4;
  cfg.max_steps = 6;  // 8 pairs: two steps per epoch
  const auto r = align_train(model, toy_pairs(8), clf, chrf, cfg);
  EXPECT_EQ(r.logs.size(), 6u);
  EXPECT_EQ(r.warnings.size(), 3u);
  EXPECT_NE(r.warnings[0].find("reward collapse"), std::string::npos);
}

TEST(AlignTrain, NonFiniteRewardAbortsWithLastCheckpoint) {
  auto model = trained_tiny(81);
  int calls = 0;
  LambdaScorer clf([](const Sentence&) { return 0.9; });
  LambdaContent content([&](const Sentence&, const Sentence&) {
    return ++calls > 20 ? std::numeric_limits<double>::quiet_NaN() : 0.9;
  });
  AlignConfig cfg;
  cfg.batch = 4;
  cfg.max_steps = 10;
  cfg.checkpoint_interval = 2;
  const auto r = align_train(model, toy_pairs(8), clf, content, cfg);
  EXPECT_TRUE(r.aborted);
  EXPECT_EQ(r.logs.size(), 5u);
  ASSERT_EQ(r.checkpoints.back().step, 4);
  for (std::size_t i = 0; i < model.parameters().size(); ++i)
    EXPECT_EQ(model.parameters()[i].value, r.checkpoints.back().model.parameters()[i].value);
}

TEST(AlignTrain, Preconditions) {
  auto untrained = testing::tiny_model<float>(1);
  LambdaScorer clf([](const Sentence&) { return 0.9; });
  ChrfScorer chrf;
  EXPECT_THROW(align_train(untrained, toy_pairs(2), clf, chrf, AlignConfig{}), Error);
  auto model = trained_tiny(2);
  AlignConfig cfg;
  cfg.perspective = Perspective::kHtOr;
  EXPECT_THROW(align_train(model, toy_pairs(2), clf, chrf, cfg), ConfigError);
  cfg = {};
  cfg.samples_per_source = 0;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "align.samples_per_source");
  }
}

TEST(SelectCheckpoint, Criteria) {
  std::vector<CheckpointEval> one = {{3, 0.1, 0.1}};
  EXPECT_EQ(select_checkpoint(one, SelectionCriterion::kFixedStep), 0u);
  EXPECT_EQ(select_checkpoint(one, SelectionCriterion::kMaxHm), 0u);

  std::vector<CheckpointEval> steps;
  for (long s = 1000; s <= 6000; s += 1000) steps.push_back({s, 0.5, 0.5});
  EXPECT_EQ(steps[select_checkpoint(steps, SelectionCriterion::kFixedStep, 5000)].step, 5000);
  EXPECT_EQ(steps[select_checkpoint(steps, SelectionCriterion::kFixedStep, 5500)].step, 5000);
  EXPECT_EQ(steps[select_checkpoint(steps, SelectionCriterion::kFixedStep, 10)].step, 1000);

  std::vector<CheckpointEval> hm = {{1, 0.9, 0.2}, {2, 0.5, 0.5}};
  EXPECT_NEAR(hm[0].hm(), 2 / (1 / 0.9 + 1 / 0.2), 1e-15);
  EXPECT_EQ(select_checkpoint(hm, SelectionCriterion::kMaxHm), 1u);
  EXPECT_THROW(select_checkpoint({}, SelectionCriterion::kMaxHm), Error);
  EXPECT_THROW(parse_selection_criterion("best"), ConfigError);
}

TEST(SelectCheckpoint, ReturnsMatchingModel) {
  auto m = trained_tiny(5);
  std::vector<Checkpoint<float>> cks = {{m, 0, 0, 0}, {m, 100, 0, 0}, {m, 200, 0, 0}};
  std::vector<CheckpointEval> ev = {{0, 0.1, 0.9}, {100, 0.6, 0.8}, {200, 0.95, 0.1}};
  EXPECT_EQ(select_checkpoint(cks, ev, SelectionCriterion::kMaxHm).step, 100);
  EXPECT_EQ(select_checkpoint(cks, ev, SelectionCriterion::kFixedStep, 200).step, 200);
  std::vector<Checkpoint<float>> single = {{m, 7, 0, 0}};
  EXPECT_EQ(select_checkpoint(single, ev, SelectionCriterion::kMaxHm).step, 7);
}

TEST(Rerank, PicksMostNaturalThenMostLikely) {
  std::vector<RerankCandidate> c(3);
  c[0].naturalness = 0.2;
  c[1].naturalness = 0.9;
  c[2].naturalness = 0.5;
  EXPECT_EQ(pick_candidate(c), 1u);
  for (auto& x : c) x.naturalness = 0.7;
  c[0].log_prob = -3;
  c[1].log_prob = -5;
  c[2].log_prob = -1;
  EXPECT_EQ(pick_candidate(c), 2u);
}

TEST(Rerank, SingleCandidateIsOneTopKSample) {
  auto m = trained_tiny(91);
  LambdaScorer clf([](const Sentence& s) { return s.size() == 2 ? 0.9 : 0.1; });
  const auto x = symbols({1, 2, 3});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng a(seed), b(seed);
    const auto r = rerank_topk(m, x, clf, a, {.candidates = 1, .top_k = 3});
    const auto s = sample_translation(m, x, 1.0, b, 3);
    EXPECT_EQ(r.ids, s.ids);
  }
  // With many candidates the preferred length shows up far more often.
  int hits_one = 0, hits_many = 0;
  Rng r1(5), r2(5);
  for (int i = 0; i < 40; ++i) {
    hits_one += rerank_topk(m, x, clf, r1, {.candidates = 1, .top_k = 3}).ids.size() == 2;
    hits_many += rerank_topk(m, x, clf, r2, {.candidates = 16, .top_k = 3}).ids.size() == 2;
  }
  EXPECT_GE(hits_many, hits_one);
}

}  // namespace
}  // namespace natalign

/*
 * Copyright 2026 The tripinfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "tripinfer/random.h"
#include "tripinfer/selftrain.h"
#include "tripinfer/synth.h"

using namespace tripinfer;
using namespace tripinfer::selftrain;

namespace {

matrix random_probabilities(rng& r, std::size_t n, std::size_t c) {
  matrix p{n, c};
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      // Cube to get a spread of confident and flat rows.
      auto const u = r.uniform(0.0, 1.0);
      p(i, k) = u * u * u;
      total += p(i, k);
    }
    for (std::size_t k = 0; k < c; ++k) p(i, k) /= total;
  }
  return p;
}

gbdt::train_config small_train() {
  gbdt::train_config c;
  c.rounds = 10;
  c.max_depth = 3;
  return c;
}

}  // namespace

TEST(Beta, WarmupDividesByUnused) {
  std::vector<std::size_t> sigma{3, 1};
  auto const b = compute_beta(sigma, 10);
  EXPECT_TRUE(b.warmup);
  EXPECT_EQ(b.unused, 6U);
  EXPECT_DOUBLE_EQ(b.beta[0], 0.5);
  EXPECT_DOUBLE_EQ(b.beta[1], 1.0 / 6.0);
}

TEST(Beta, AfterWarmupDividesByBestClass) {
  std::vector<std::size_t> sigma{6, 2};
  auto const b = compute_beta(sigma, 10);
  EXPECT_FALSE(b.warmup);
  EXPECT_DOUBLE_EQ(b.beta[0], 1.0);
  EXPECT_DOUBLE_EQ(b.beta[1], 1.0 / 3.0);
  auto const t = flexible_thresholds(b.beta, 0.9);
  EXPECT_DOUBLE_EQ(t[0], 0.9);
  EXPECT_DOUBLE_EQ(t[1], 0.3);
}

TEST(Beta, EmptyAndOverfull) {
  std::vector<std::size_t> zero{0, 0};
  auto const b = compute_beta(zero, 0);
  EXPECT_EQ(b.beta, (std::vector<double>{0.0, 0.0}));
  std::vector<std::size_t> over{6, 5};
  EXPECT_THROW(compute_beta(over, 10), std::invalid_argument);
}

TEST(Thresholds, FloorApplies) {
  std::vector<double> beta{0.0, 0.5, 1.0};
  auto const t = flexible_thresholds(beta, 0.8, 0.5);
  EXPECT_EQ(t, (std::vector<double>{0.5, 0.5, 0.8}));
}

TEST(Sigma, StrictThresholdAndLowestIndexTies) {
  matrix p{4, 2, {0.9, 0.1, 0.95, 0.05, 0.5, 0.5, 0.02, 0.98}};
  auto const s = compute_sigma(p, 0.9);
  EXPECT_EQ(s, (std::vector<std::size_t>{1, 1}));
  auto const low = compute_sigma(p, 0.4);
  EXPECT_EQ(low, (std::vector<std::size_t>{3, 1}));
}

TEST(PseudoLabel, KeepsRowsAboveTheirClassThreshold) {
  matrix p{3, 2, {0.95, 0.05, 0.6, 0.4, 0.2, 0.8}};
  std::vector<double> t{0.9, 0.3};
  auto const s = pseudo_label(p, t, 2);
  EXPECT_EQ(s.rows, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(s.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.confidence, (std::vector<double>{0.95, 0.8}));
  EXPECT_EQ(s.iteration, 2);
}

TEST(Cpl, InvariantsOnRandomProbabilities) {
  rng r{11};
  for (int k = 0; k < 200; ++k) {
    auto const n = r.below(300);
    auto const c = 2 + r.below(5);
    auto const p = random_probabilities(r, n, c);
    auto const tau = r.uniform(0.3, 0.99);
    auto const sigma = compute_sigma(p, tau);
    auto const b = compute_beta(sigma, n);
    auto const sum = std::accumulate(sigma.begin(), sigma.end(), std::size_t{0});
    ASSERT_LE(sum, n);
    EXPECT_EQ(b.unused, n - sum);
    for (auto const v : b.beta) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    auto const t = flexible_thresholds(b.beta, tau);
    for (auto const v : t) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, tau);
    }
    // Lowering thresholds can only admit more rows, and everything above tau
    // always passes.
    auto const s = pseudo_label(p, t);
    EXPECT_GE(s.size(), sum);
    for (std::size_t j = 0; j < s.size(); ++j) {
      EXPECT_GT(s.confidence[j], t[static_cast<std::size_t>(s.labels[j])]);
    }
  }
}

TEST(Improves, SilhouetteFirstThenDaviesBouldin) {
  metrics::clustering_scores best{0.5, 1.0, false};
  EXPECT_TRUE(improves({0.6, 9.0, false}, best));
  EXPECT_FALSE(improves({0.4, 0.1, false}, best));
  EXPECT_TRUE(improves({0.5, 0.9, false}, best));
  EXPECT_FALSE(improves({0.5, 1.0, false}, best));
}

TEST(Config, Validation) {
  config c;
  EXPECT_NO_THROW(c.validate());
  c.tau = 1.0;
  EXPECT_THROW(c.validate(), usage_error);
  c = {};
  c.tau_min = 0.95;
  EXPECT_THROW(c.validate(), usage_error);
  c = {};
  c.max_iters = -1;
  EXPECT_THROW(c.validate(), usage_error);
}

TEST(Loop, ZeroIterationsReturnsTheTeacher) {
  auto const lab = synth::make_blobs(120, 3, 2, 2.0, 1);
  auto const unl = synth::make_blobs(200, 3, 2, 2.0, 2);
  config cfg;
  cfg.max_iters = 0;
  auto const r = teacher_student_loop(lab.x, lab.y, unl.x, 3, small_train(), cfg);
  EXPECT_EQ(r.best_iteration, 0);
  EXPECT_EQ(gbdt::to_json(r.model), gbdt::to_json(r.teacher));
  EXPECT_EQ(gbdt::to_json(r.teacher), gbdt::to_json(gbdt::train(lab.x, lab.y, 3, small_train())));
  ASSERT_EQ(r.log.size(), 1U);
  EXPECT_TRUE(r.log[0].sigma.empty());
}

TEST(Loop, StopsAtFirstRejectedStudent) {
  auto const lab = synth::make_blobs(90, 3, 2, 2.5, 3);
  auto const unl = synth::make_blobs(150, 3, 2, 2.5, 4);
  config cfg;
  cfg.max_iters = 6;
  // Scores rise for two students, then fall.
  int calls = 0;
  scorer_fn scorer = [&](matrix const&, std::span<int const>) {
    double const s[] = {0.1, 0.2, 0.3, 0.25, 0.9};
    return metrics::clustering_scores{s[calls++], 1.0, false};
  };
  auto const r = teacher_student_loop(lab.x, lab.y, unl.x, 3, small_train(), cfg, 1, scorer);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(r.best_iteration, 2);
  ASSERT_EQ(r.log.size(), 4U);
  EXPECT_TRUE(r.log[2].accepted);
  EXPECT_FALSE(r.log[3].accepted);
  for (std::size_t k = 1; k < r.log.size(); ++k) {
    EXPECT_EQ(r.log[k].iter, static_cast<int>(k));
    EXPECT_EQ(r.log[k].sigma.size(), 3U);
    auto const pseudo = std::accumulate(r.log[k].pseudo_per_class.begin(), r.log[k].pseudo_per_class.end(),
                                        std::size_t{0});
    EXPECT_LE(pseudo, unl.x.rows());
  }
}

TEST(Loop, AcceptedScoresStrictlyImprove) {
  auto const lab = synth::make_blobs(60, 3, 3, 1.5, 5);
  auto const unl = synth::make_blobs(300, 3, 3, 1.5, 6);
  config cfg;
  cfg.max_iters = 5;
  auto const r = teacher_student_loop(lab.x, lab.y, unl.x, 3, small_train(), cfg);
  metrics::clustering_scores best = r.log[0].scores;
  for (std::size_t k = 1; k < r.log.size(); ++k) {
    EXPECT_EQ(r.log[k].accepted, improves(r.log[k].scores, best));
    if (r.log[k].accepted) best = r.log[k].scores;
  }
  EXPECT_LE(r.log.size(), 6U);
}

TEST(Loop, DeterministicAcrossThreads) {
  auto const lab = synth::make_blobs(80, 3, 2, 2.0, 7);
  auto const unl = synth::make_blobs(200, 3, 2, 2.0, 8);
  config cfg;
  cfg.max_iters = 3;
  auto const a = teacher_student_loop(lab.x, lab.y, unl.x, 3, small_train(), cfg, 1);
  auto const b = teacher_student_loop(lab.x, lab.y, unl.x, 3, small_train(), cfg, 4);
  EXPECT_EQ(gbdt::to_json(a.model), gbdt::to_json(b.model));
  EXPECT_EQ(a.best_iteration, b.best_iteration);
}

TEST(Loop, EmptyUnlabeledPoolKeepsTeacher) {
  auto const lab = synth::make_blobs(60, 2, 2, 2.0, 9);
  auto const r = teacher_student_loop(lab.x, lab.y, matrix{0, 2}, 2, small_train(), {});
  EXPECT_EQ(r.best_iteration, 0);
  EXPECT_TRUE(r.log[0].scores.degenerate);
}

TEST(Log, CsvLayout) {
  iteration_record zero;
  zero.scores = {0.25, 1.5, false};
  iteration_record one;
  one.iter = 1;
  one.sigma = {3, 1};
  one.beta = {0.5, 0.25};
  one.thresholds = {0.45, 0.225};
  one.pseudo_per_class = {4, 2};
  one.scores = {0.0, 0.0, true};
  std::vector<iteration_record> log{zero, one};
  std::vector<std::string> names{"a", "b"};
  std::ostringstream out;
  write_log(out, log, names);
  EXPECT_EQ(out.str(),
            "iter,class,sigma,beta,threshold,pseudo_count,silhouette,db_index\n"
            "0,a,,,,,0.25,1.5\n"
            "0,b,,,,,0.25,1.5\n"
            "1,a,3,0.5,0.45,4,,\n"
            "1,b,1,0.25,0.225,2,,\n");
}

TEST(Sigma, UnconfidentRowsAndZeroTau) {
  matrix p{3, 3, {0.4, 0.3, 0.3, 0.2, 0.5, 0.3, 0.34, 0.33, 0.33}};
  EXPECT_EQ(compute_sigma(p, 0.9), (std::vector<std::size_t>{0, 0, 0}));
  auto const all = compute_sigma(p, 0.0);
  EXPECT_EQ(std::accumulate(all.begin(), all.end(), std::size_t{0}), 3U);
  EXPECT_EQ(pseudo_label(matrix{0, 3}, std::vector<double>{0.5, 0.5, 0.5}).size(), 0U);
}

TEST(PseudoLabel, SameDistributionBeatsPlainTeacher) {
  // One draw split in two so both halves share the blob centres.
  auto const all = synth::make_blobs(1200, 3, 2, 1.2, 21);
  std::vector<std::size_t> lab_rows, unl_rows;
  for (std::size_t i = 0; i < all.y.size(); ++i) (i % 4 == 0 ? lab_rows : unl_rows).push_back(i);
  auto const lab = select_rows(all.x, lab_rows);
  auto const unl = select_rows(all.x, unl_rows);
  std::vector<int> y_lab, y_unl;
  for (auto const i : lab_rows) y_lab.push_back(all.y[i]);
  for (auto const i : unl_rows) y_unl.push_back(all.y[i]);

  auto const teacher = gbdt::train(lab, y_lab, 3, small_train());
  auto const probs = gbdt::predict_proba(teacher, unl);
  auto const plain = gbdt::argmax_rows(probs);
  double teacher_hits = 0.0;
  for (std::size_t i = 0; i < plain.size(); ++i) teacher_hits += plain[i] == y_unl[i];

  auto const sigma = compute_sigma(probs, 0.9);
  auto const t = flexible_thresholds(compute_beta(sigma, unl.rows()).beta, 0.9);
  auto const s = pseudo_label(probs, t);
  ASSERT_GT(s.size(), 0U);
  double pseudo_hits = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) pseudo_hits += s.labels[k] == y_unl[s.rows[k]];
  EXPECT_GE(pseudo_hits / static_cast<double>(s.size()), teacher_hits / static_cast<double>(plain.size()));
}

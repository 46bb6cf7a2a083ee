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

#include <cmath>

#include "nlohmann/json.hpp"
#include "oracles.h"
#include "tripinfer/metrics.h"
#include "tripinfer/random.h"

using namespace tripinfer;
using namespace tripinfer::metrics;

namespace {

struct fixture {
  matrix x;
  std::vector<int> y;
};

fixture random_fixture(rng& r, std::size_t n, std::size_t k, std::size_t f) {
  fixture fx{matrix{n, f}, std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    fx.y[i] = static_cast<int>(i < k ? i : r.below(k));
    for (std::size_t d = 0; d < f; ++d) {
      fx.x(i, d) = r.normal(static_cast<double>(fx.y[i]), 1.5);
    }
  }
  return fx;
}

}  // namespace

TEST(Report, PerfectPredictions) {
  std::vector<int> y{0, 1, 2, 2, 1, 0};
  auto const r = evaluate(y, y, {"a", "b", "c"});
  EXPECT_EQ(r.overall_accuracy, 1.0);
  EXPECT_EQ(r.weighted_precision, 1.0);
  EXPECT_EQ(r.weighted_recall, 1.0);
  EXPECT_EQ(r.weighted_accuracy, 1.0);
  for (auto const& s : r.per_class) {
    EXPECT_EQ(s.precision, 1.0);
    EXPECT_EQ(s.recall, 1.0);
  }
}

TEST(Report, WeightedRecallArithmetic) {
  std::vector<int> truth, pred;
  for (int i = 0; i < 90; ++i) {
    truth.push_back(0);
    pred.push_back(i < 81 ? 0 : 1);
  }
  for (int i = 0; i < 10; ++i) {
    truth.push_back(1);
    pred.push_back(i < 5 ? 1 : 0);
  }
  auto const r = evaluate(truth, pred, {"a", "b"});
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.9);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 0.5);
  EXPECT_NEAR(r.weighted_recall, 0.86, 1e-15);
}

TEST(Report, UndefinedPrecisionFlaggedAndLengthMismatch) {
  auto const r = evaluate(std::vector<int>{0, 0, 1}, std::vector<int>{0, 0, 0}, {"a", "b"});
  EXPECT_TRUE(r.per_class[1].precision_undefined);
  EXPECT_EQ(r.per_class[1].precision, 0.0);
  EXPECT_THROW(evaluate(std::vector<int>{0}, std::vector<int>{0, 1}, {"a", "b"}), std::invalid_argument);
}

TEST(Report, WeightedRecallEqualsMicroAccuracyAndRowSums) {
  rng r{1};
  for (int k = 0; k < 50; ++k) {
    auto const C = 2 + r.below(4);
    auto const n = 1 + r.below(200);
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(r.below(C));
      p[i] = static_cast<int>(r.below(C));
    }
    std::vector<std::string> names(C, "c");
    auto const rep = evaluate(t, p, names);
    EXPECT_EQ(rep.weighted_recall, rep.overall_accuracy);
    EXPECT_EQ(rep.matrix.total(), n);
    for (std::size_t c = 0; c < C; ++c) {
      EXPECT_EQ(rep.matrix.support(c), static_cast<std::size_t>(std::count(t.begin(), t.end(), static_cast<int>(c))));
    }
  }
}

TEST(Silhouette, TightFarClustersAndIdenticalPoints) {
  matrix x{4, 1, {0.0, 0.0, 10.0, 10.0}};
  std::vector<int> y{0, 0, 1, 1};
  EXPECT_EQ(silhouette(x, y), 1.0);
  matrix same{4, 2, 3.0};
  EXPECT_EQ(silhouette(same, y), 0.0);
  EXPECT_THROW(silhouette(x, std::vector<int>{0, 0, 0, 0}), data_error);
}

TEST(DaviesBouldin, SingletonsSymmetryAndDegenerate) {
  matrix two{2, 2, {0.0, 0.0, 3.0, 4.0}};
  EXPECT_EQ(davies_bouldin(two, std::vector<int>{0, 1}), 0.0);
  matrix sym{4, 1, {-2.0, -1.0, 1.0, 2.0}};
  EXPECT_DOUBLE_EQ(davies_bouldin(sym, std::vector<int>{0, 0, 1, 1}), (0.5 + 0.5) / 3.0);
  matrix coincident{4, 1, {-1.0, 1.0, -2.0, 2.0}};
  try {
    davies_bouldin(coincident, std::vector<int>{0, 0, 1, 1});
    FAIL();
  } catch (data_error const& e) {
    EXPECT_STREQ(e.what(), "degenerate centroids");
  }
}

TEST(Clustering, MatchBruteForceOracles) {
  rng r{2};
  for (int k = 0; k < 50; ++k) {
    auto const n = 4 + r.below(197);
    auto const fx = random_fixture(r, n, 2 + r.below(4), 1 + r.below(5));
    auto const s = silhouette(fx.x, fx.y, 0, 0, 1 + static_cast<unsigned>(k % 3));
    EXPECT_NEAR(s, oracle::silhouette(fx.x, fx.y), 1e-12);
    EXPECT_NEAR(davies_bouldin(fx.x, fx.y), oracle::davies_bouldin(fx.x, fx.y), 1e-12);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_GE(davies_bouldin(fx.x, fx.y), 0.0);
  }
}

TEST(Clustering, PermutationAndTranslationInvariant) {
  rng r{3};
  auto const fx = random_fixture(r, 80, 3, 3);
  std::vector<std::size_t> order(80);
  std::iota(order.begin(), order.end(), 0U);
  r.shuffle(std::span<std::size_t>{order});
  auto const moved = select_rows(fx.x, order);
  std::vector<int> y2;
  for (auto const i : order) y2.push_back(fx.y[i]);
  matrix shifted = fx.x;
  for (std::size_t i = 0; i < 80; ++i)
    for (std::size_t d = 0; d < 3; ++d) shifted(i, d) += 7.25;
  auto const s = silhouette(fx.x, fx.y);
  EXPECT_NEAR(silhouette(moved, y2), s, 1e-12);
  EXPECT_NEAR(silhouette(shifted, fx.y), s, 1e-12);
  auto const db = davies_bouldin(fx.x, fx.y);
  EXPECT_NEAR(davies_bouldin(moved, y2), db, 1e-12);
  EXPECT_NEAR(davies_bouldin(shifted, fx.y), db, 1e-12);
}

TEST(Silhouette, CapScoresASeededSubsample) {
  rng r{4};
  auto const fx = random_fixture(r, 300, 3, 2);
  auto const a = silhouette(fx.x, fx.y, 100, 5);
  EXPECT_EQ(a, silhouette(fx.x, fx.y, 100, 5, 3));
  EXPECT_NE(a, silhouette(fx.x, fx.y, 100, 6));
  EXPECT_NE(a, silhouette(fx.x, fx.y, 0));
}

TEST(Clustering, StandardizedQualityAndDegenerateFlag) {
  matrix x{4, 2, {0.0, 0.0, 0.0, 1.0, 100.0, 0.0, 100.0, 1.0}};
  auto const q = cluster_quality(x, std::vector<int>{0, 0, 1, 1});
  EXPECT_FALSE(q.degenerate);
  EXPECT_NEAR(q.silhouette, oracle::silhouette(standardize(x), std::vector<int>{0, 0, 1, 1}), 1e-12);
  auto const d = cluster_quality(x, std::vector<int>{1, 1, 1, 1});
  EXPECT_TRUE(d.degenerate);
  auto const z = standardize(matrix{3, 2, {1.0, 5.0, 2.0, 5.0, 3.0, 5.0}});
  EXPECT_NEAR(z(0, 0), -std::sqrt(1.5), 1e-12);
  EXPECT_EQ(z(1, 1), 0.0);
}

TEST(Report, JsonShape) {
  auto const r = evaluate(std::vector<int>{0, 1}, std::vector<int>{0, 0}, {"a", "b"});
  auto const j = nlohmann::json::parse(report_json(r, clustering_scores{0.5, 1.2, false}));
  EXPECT_EQ(j["overall_accuracy"], 0.5);
  EXPECT_EQ(j["clustering"]["silhouette"], 0.5);
  EXPECT_EQ(j["per_class"].size(), 2U);
}

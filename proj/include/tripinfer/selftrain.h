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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "tripinfer/gbdt.h"
#include "tripinfer/matrix.h"
#include "tripinfer/metrics.h"

namespace tripinfer::selftrain {

// sigma(c): rows whose top probability is strictly above tau and whose argmax
// (lowest index on ties) is c.
std::vector<std::size_t> compute_sigma(matrix const& probabilities, double tau);

struct beta_result {
  std::vector<double> beta;
  bool warmup{};       // unused rows outnumber the best-learned class
  std::size_t unused{};  // N - sum(sigma)
};

// beta(c) = sigma(c) / max(max sigma, N - sum sigma) while warm-up is active
// (max sigma < N - sum sigma), sigma(c) / max sigma otherwise; all zeros when
// the denominator is 0. Throws std::invalid_argument when sum sigma > N.
beta_result compute_beta(std::span<std::size_t const> sigma, std::size_t n);

// T(c) = max(beta(c) * tau, tau_min).
std::vector<double> flexible_thresholds(std::span<double const> beta, double tau,
                                        double tau_min = 0.0);

struct pseudo_label_set {
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::vector<double> confidence;
  int iteration{};

  std::size_t size() const { return rows.size(); }
};

// Keeps row i iff max_c p(i, c) > T(argmax).
pseudo_label_set pseudo_label(matrix const& probabilities, std::span<double const> thresholds,
                              int iteration = 0);

struct config {
  double tau{0.9};
  double tau_min{0.0};
  int max_iters{10};
  std::size_t score_cap{metrics::kDefaultSampleCap};
  std::uint64_t seed{0};

  // Throws usage_error.
  void validate() const;
};

// Label-free quality of a model on the unlabeled rows.
using scorer_fn =
    std::function<metrics::clustering_scores(matrix const& unlabeled, std::span<int const> predicted)>;

// Higher silhouette wins; on equal silhouette a lower Davies-Bouldin index
// wins.
bool improves(metrics::clustering_scores const& candidate, metrics::clustering_scores const& best);

struct iteration_record {
  int iter{};
  std::vector<std::size_t> sigma;      // empty for the initial teacher
  std::vector<double> beta;
  std::vector<double> thresholds;
  std::vector<std::size_t> pseudo_per_class;
  bool warmup{};
  metrics::clustering_scores scores;
  bool accepted{};
};

struct result {
  gbdt::tree_ensemble model;    // best-scoring model
  gbdt::tree_ensemble teacher;  // initial teacher
  int best_iteration{};         // 0 = the teacher
  std::vector<iteration_record> log;
};

// Teacher-student cycling. A student is trained from scratch each iteration
// on the labeled rows plus the current pseudo-labels, with class weights
// recomputed over the mixed set. The loop stops at the first student that
// does not improve on the best score so far, or after max_iters. The default
// scorer is metrics::cluster_quality with the configured cap and seed.
result teacher_student_loop(matrix const& labeled, std::span<int const> labels,
                            matrix const& unlabeled, std::size_t num_classes,
                            gbdt::train_config const& train, config const& cfg,
                            unsigned threads = 1, scorer_fn scorer = {});

// iter,class,sigma,beta,threshold,pseudo_count,silhouette,db_index
// One row per class per iteration; iteration 0 leaves the CPL fields empty.
void write_log(std::ostream& out, std::span<iteration_record const> log,
               std::span<std::string const> class_names);

}  // namespace tripinfer::selftrain

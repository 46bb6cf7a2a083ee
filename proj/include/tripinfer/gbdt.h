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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tripinfer/matrix.h"

namespace tripinfer::gbdt {

// Hyperparameters of the boosted-tree learner.
struct train_config {
  double gamma{0.0};             // penalty per leaf
  double lambda{1.0};            // L2 shrinkage of leaf weights
  double eta{0.1};               // learning rate, in (0, 1]
  int max_depth{6};              // split levels per tree
  int rounds{100};               // boosting rounds; each adds one tree per class
  double min_child_hessian{1.0}; // minimum hessian sum in either child
  double subsample{1.0};         // row fraction per round, in (0, 1]
  double colsample{1.0};         // feature fraction per tree, in (0, 1]
  std::uint64_t seed{0};

  // Throws usage_error naming the first offending field.
  void validate() const;

  friend bool operator==(train_config const&, train_config const&) = default;
};

struct tree_node {
  int feature{-1};  // -1 marks a leaf
  double threshold{};
  bool default_left{true};
  int left{-1};
  int right{-1};
  double weight{};  // leaf score, already scaled by eta
  double cover{};   // training rows that reached the node

  bool is_leaf() const { return feature < 0; }

  friend bool operator==(tree_node const&, tree_node const&) = default;
};

struct tree {
  std::vector<tree_node> nodes;  // nodes[0] is the root

  // A value equal to kMissing (-1) or NaN follows default_left.
  int leaf_index(std::span<double const> row) const;
  double predict(std::span<double const> row) const { return nodes[leaf_index(row)].weight; }
  std::size_t leaf_count() const;

  friend bool operator==(tree const&, tree const&) = default;
};

// Softmax over additive per-class margins. trees[r * num_classes + c] is the
// tree of class c in round r.
struct tree_ensemble {
  std::size_t num_classes{};
  std::size_t num_features{};
  std::vector<double> base_score;
  train_config config;
  std::vector<tree> trees;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  std::size_t rounds() const { return num_classes == 0 ? 0 : trees.size() / num_classes; }
  tree const& at(std::size_t round, std::size_t cls) const { return trees[round * num_classes + cls]; }

  // Throws std::invalid_argument on arity mismatch.
  std::vector<double> margins(std::span<double const> row) const;
  std::vector<double> predict_proba(std::span<double const> row) const;

  friend bool operator==(tree_ensemble const&, tree_ensemble const&) = default;
};

std::vector<double> softmax(std::span<double const> margins);

constexpr double kProbabilityFloor = 1e-15;

// -(1/N) sum_i (1/n_{y_i}) log p_{i,y_i}, probabilities clamped at 1e-15.
// *clamped is set when any clamp was applied.
double weighted_ce_loss(matrix const& probabilities, std::span<int const> labels,
                        std::span<std::size_t const> class_counts, bool* clamped = nullptr);

std::vector<std::size_t> class_counts(std::span<int const> labels, std::size_t num_classes);

// Per-sample weights proportional to 1/n_{y_i}, normalised to mean 1 over
// the sample (w_i = N / (C' n_{y_i}), C' = number of present classes).
std::vector<double> class_balanced_weights(std::span<int const> labels, std::size_t num_classes);

struct gradients {
  matrix grad;  // N x C
  matrix hess;  // N x C
};

// g = w_i (p_ic - [c == y_i]), h = w_i p_ic (1 - p_ic), p = softmax(margin row).
gradients softmax_grad_hess(matrix const& margins, std::span<int const> labels,
                            std::span<double const> sample_weights);

// Objective trajectory recorded during training: entry 0 is the initial
// model, entry r the model after round r.
struct train_trace {
  std::vector<double> loss;            // sum_i w_i * -log p_{i,y_i}
  std::vector<double> regularization;  // sum over trees of gamma*T + lambda/2 * sum w^2
  std::vector<double> objective;       // loss + regularization
};

double tree_regularization(tree const& t, double gamma, double lambda);

// Features equal to -1 are missing. Throws data_error on a non-finite feature,
// on fewer rows than classes, or when a class has no rows. Deterministic given
// (data, config); the result does not depend on `threads`.
tree_ensemble train(matrix const& features, std::span<int const> labels, std::size_t num_classes,
                    train_config const& config, unsigned threads = 1,
                    train_trace* trace = nullptr);

// As above with caller-supplied per-sample weights.
tree_ensemble train_weighted(matrix const& features, std::span<int const> labels,
                             std::span<double const> weights, std::size_t num_classes,
                             train_config const& config, unsigned threads = 1,
                             train_trace* trace = nullptr);

matrix predict_proba(tree_ensemble const& model, matrix const& features, unsigned threads = 1);
matrix predict_margins(tree_ensemble const& model, matrix const& features, unsigned threads = 1);

// Argmax with ties to the lowest class index.
int argmax(std::span<double const> v);
std::vector<int> argmax_rows(matrix const& m);

// Versioned JSON document; doubles round-trip bit-exactly.
std::string to_json(tree_ensemble const& model);
tree_ensemble from_json(std::string const& text);
void save(tree_ensemble const& model, std::filesystem::path const& path);
tree_ensemble load(std::filesystem::path const& path);

// ---------------------------------------------------------------------------
// Model selection

struct index_split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Per class, round(fraction * n_c) seeded draws go to validation; at least
// one row of every class stays in train. Both lists are sorted.
index_split stratified_split(std::span<int const> labels, std::size_t num_classes,
                             double validation_fraction, std::uint64_t seed);

using metric_fn = std::function<double(std::span<int const> truth, matrix const& probabilities)>;

double accuracy_metric(std::span<int const> truth, matrix const& probabilities);

struct grid_search_result {
  std::size_t best_index{};
  train_config best;
  std::vector<double> scores;  // one per candidate, in grid order
};

// Trains every candidate on the stratified train part and scores it on the
// validation part; ties keep the earlier candidate.
grid_search_result grid_search(matrix const& features, std::span<int const> labels,
                               std::size_t num_classes, std::span<train_config const> grid,
                               double validation_fraction = 0.2,
                               metric_fn const& metric = accuracy_metric, std::uint64_t seed = 0,
                               unsigned threads = 1);

}  // namespace tripinfer::gbdt

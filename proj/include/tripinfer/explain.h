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
#include <string>
#include <string_view>
#include <vector>

#include "tripinfer/gbdt.h"
#include "tripinfer/matrix.h"

namespace tripinfer::explain {

// Shapley values of one tree on the margin scale, path-dependent
// (cover-weighted) conditioning. Adds into phi (size F); returns the tree's
// expected value.
double tree_shap(gbdt::tree const& t, std::span<double const> row, std::span<double> phi);

struct attribution {
  matrix phi;                // C x F
  std::vector<double> base;  // per class: base score + expected tree values
};

// sum_f phi(c, f) + base[c] equals the ensemble's margin for class c.
// Throws std::invalid_argument on arity mismatch.
attribution shap_values(gbdt::tree_ensemble const& model, std::span<double const> row);

struct feature_rank {
  std::size_t feature{};
  std::string name;
  std::string group;
  double mean_abs{};
  std::size_t rank{};  // 1 = most important
};

using group_fn = std::function<std::string_view(std::size_t feature)>;

// Per class, mean over rows of |phi|, sorted descending (ties by feature
// index). Throws data_error on an empty dataset.
std::vector<std::vector<feature_rank>> mean_abs_shap(gbdt::tree_ensemble const& model,
                                                     matrix const& rows, group_fn const& group,
                                                     unsigned threads = 1);

// class,feature,group,mean_abs_shap,rank
void write_attribution(std::ostream& out, std::vector<std::vector<feature_rank>> const& table,
                       std::span<std::string const> class_names);

// Mean drop of `metric` over `repeats` seeded shuffles of each column.
std::vector<double> permutation_importance(gbdt::tree_ensemble const& model, matrix const& rows,
                                           std::span<int const> labels,
                                           gbdt::metric_fn const& metric, int repeats,
                                           std::uint64_t seed, unsigned threads = 1);

}  // namespace tripinfer::explain

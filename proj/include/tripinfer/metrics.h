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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripinfer/matrix.h"

namespace tripinfer::metrics {

struct confusion_matrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::size_t>> counts;  // [true][predicted]

  std::size_t total() const;
  std::size_t support(std::size_t cls) const;  // row sum
};

confusion_matrix confusion(std::span<int const> truth, std::span<int const> predicted,
                           std::vector<std::string> class_names);

struct class_stats {
  std::size_t tp{}, fp{}, fn{}, tn{};
  std::size_t support{};  // tp + fn
  double precision{};
  double recall{};
  double accuracy{};  // one-vs-rest (tp + tn) / N
  bool precision_undefined{};  // tp + fp = 0, reported as 0
  bool recall_undefined{};     // no true samples, reported as 0
};

struct classification_report {
  std::vector<std::string> class_names;
  std::vector<class_stats> per_class;
  // Support-weighted means over classes: sum_i metric_i * n_i / sum_i n_i.
  double weighted_precision{};
  double weighted_recall{};
  double weighted_accuracy{};
  double overall_accuracy{};  // sum tp / N
  std::size_t samples{};
  confusion_matrix matrix;
};

// Throws std::invalid_argument on length mismatch or a label outside
// [0, class_names.size()).
classification_report evaluate(std::span<int const> truth, std::span<int const> predicted,
                               std::vector<std::string> class_names);

constexpr std::size_t kDefaultSampleCap = 10000;

// Mean silhouette coefficient under Euclidean distance. Points in singleton
// clusters score 0, as do points with a = b = 0. With more than `cap` points a
// seeded uniform subsample of `cap` points is scored against itself. Throws
// data_error when fewer than two clusters are present.
double silhouette(matrix const& points, std::span<int const> labels,
                  std::size_t cap = kDefaultSampleCap, std::uint64_t seed = 0,
                  unsigned threads = 1);

// Mean over clusters of the worst (scatter_i + scatter_j) / centroid distance.
// Throws data_error("degenerate centroids") when two centroids coincide and
// data_error when fewer than two clusters are present.
double davies_bouldin(matrix const& points, std::span<int const> labels);

// Column-wise z-scores; constant columns map to 0.
matrix standardize(matrix const& points);

struct clustering_scores {
  double silhouette{};
  double davies_bouldin{};
  bool degenerate{};  // fewer than two clusters or coincident centroids
};

// Scores the standardized points; degenerate labelings get silhouette -1 and
// an infinite Davies-Bouldin index instead of an error.
clustering_scores cluster_quality(matrix const& points, std::span<int const> labels,
                                  std::size_t cap = kDefaultSampleCap, std::uint64_t seed = 0,
                                  unsigned threads = 1);

// JSON object with the per-class table, weighted aggregates, confusion
// matrix, optional clustering scores and flags.
std::string report_json(classification_report const& r,
                        std::optional<clustering_scores> const& clustering = std::nullopt);

}  // namespace tripinfer::metrics

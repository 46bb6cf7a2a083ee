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

#include "tripinfer/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "nlohmann/json.hpp"

#include "tripinfer/common.h"
#include "tripinfer/parallel.h"
#include "tripinfer/random.h"

namespace tripinfer::metrics {

namespace {

double distance(std::span<double const> a, std::span<double const> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto const d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

// Dense cluster ids in ascending label order.
std::vector<std::size_t> dense_ids(std::span<int const> labels, std::size_t& clusters) {
  std::map<int, std::size_t> id;
  for (auto const l : labels) {
    id.emplace(l, 0);
  }
  std::size_t next = 0;
  for (auto& [label, i] : id) {
    i = next++;
  }
  clusters = next;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[i] = id.at(labels[i]);
  }
  return out;
}

void check_points(matrix const& points, std::span<int const> labels) {
  if (points.rows() != labels.size()) {
    throw std::invalid_argument("clustering: label count does not match points");
  }
  for (auto const v : points.data()) {
    if (!std::isfinite(v)) {
      throw data_error("clustering: non-finite coordinate");
    }
  }
}

}  // namespace

std::size_t confusion_matrix::total() const {
  std::size_t t = 0;
  for (auto const& row : counts) {
    t = std::accumulate(begin(row), end(row), t);
  }
  return t;
}

std::size_t confusion_matrix::support(std::size_t cls) const {
  return std::accumulate(begin(counts[cls]), end(counts[cls]), std::size_t{0});
}

confusion_matrix confusion(std::span<int const> truth, std::span<int const> predicted,
                           std::vector<std::string> class_names) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                                std::to_string(predicted.size()) + " predictions");
  }
  auto const c = class_names.size();
  confusion_matrix m{std::move(class_names), std::vector<std::vector<std::size_t>>(c, std::vector<std::size_t>(c))};
  auto const check = [c](int l) {
    if (l < 0 || static_cast<std::size_t>(l) >= c) {
      throw std::invalid_argument("confusion: label " + std::to_string(l) + " out of range");
    }
    return static_cast<std::size_t>(l);
  };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m.counts[check(truth[i])][check(predicted[i])];
  }
  return m;
}

classification_report evaluate(std::span<int const> truth, std::span<int const> predicted,
                               std::vector<std::string> class_names) {
  classification_report r;
  r.matrix = confusion(truth, predicted, class_names);
  r.class_names = std::move(class_names);
  auto const c = r.class_names.size();
  auto const n = truth.size();
  r.samples = n;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < c; ++k) {
    class_stats s;
    s.tp = r.matrix.counts[k][k];
    for (std::size_t j = 0; j < c; ++j) {
      if (j != k) {
        s.fn += r.matrix.counts[k][j];
        s.fp += r.matrix.counts[j][k];
      }
    }
    s.support = s.tp + s.fn;
    s.tn = n - s.tp - s.fn - s.fp;
    s.precision_undefined = s.tp + s.fp == 0;
    s.recall_undefined = s.support == 0;
    s.precision = s.precision_undefined ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    s.recall = s.recall_undefined ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(s.support);
    s.accuracy = n == 0 ? 0.0 : static_cast<double>(s.tp + s.tn) / static_cast<double>(n);
    correct += s.tp;
    r.per_class.push_back(s);
  }
  if (n != 0) {
    for (auto const& s : r.per_class) {
      auto const w = static_cast<double>(s.support) / static_cast<double>(n);
      r.weighted_precision += w * s.precision;
      r.weighted_accuracy += w * s.accuracy;
    }
    r.overall_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    // (n_c / N) * (tp_c / n_c) summed over classes, with the supports
    // cancelled before rounding.
    r.weighted_recall = r.overall_accuracy;
  }
  return r;
}

double silhouette(matrix const& points, std::span<int const> labels, std::size_t cap,
                  std::uint64_t seed, unsigned threads) {
  check_points(points, labels);
  std::vector<std::size_t> rows(points.rows());
  std::iota(begin(rows), end(rows), std::size_t{0});
  if (cap != 0 && rows.size() > cap) {
    rng random{seed};
    random.shuffle(std::span<std::size_t>{rows});
    rows.resize(cap);
    std::sort(begin(rows), end(rows));
  }
  std::vector<int> sub_labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sub_labels[i] = labels[rows[i]];
  }
  std::size_t k = 0;
  auto const id = dense_ids(sub_labels, k);
  if (k < 2) {
    throw data_error("silhouette: need at least two clusters");
  }
  std::vector<std::size_t> size(k, 0);
  for (auto const c : id) {
    ++size[c];
  }

  auto const n = rows.size();
  std::vector<double> s(n, 0.0);
  parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> sum(k);
    for (auto i = lo; i < hi; ++i) {
      auto const own = id[i];
      if (size[own] < 2) {
        continue;
      }
      std::fill(begin(sum), end(sum), 0.0);
      auto const pi = points.row(rows[i]);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
          sum[id[j]] += distance(pi, points.row(rows[j]));
        }
      }
      auto const a = sum[own] / static_cast<double>(size[own] - 1);
      auto b = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        if (c != own) {
          b = std::min(b, sum[c] / static_cast<double>(size[c]));
        }
      }
      auto const m = std::max(a, b);
      s[i] = m > 0.0 ? (b - a) / m : 0.0;
    }
  });
  return std::accumulate(begin(s), end(s), 0.0) / static_cast<double>(n);
}

double davies_bouldin(matrix const& points, std::span<int const> labels) {
  check_points(points, labels);
  std::size_t k = 0;
  auto const id = dense_ids(labels, k);
  if (k < 2) {
    throw data_error("davies_bouldin: need at least two clusters");
  }
  auto const f = points.cols();
  matrix centroid{k, f};
  std::vector<std::size_t> size(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    ++size[id[i]];
    for (std::size_t d = 0; d < f; ++d) {
      centroid(id[i], d) += points(i, d);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < f; ++d) {
      centroid(c, d) /= static_cast<double>(size[c]);
    }
  }
  std::vector<double> scatter(k, 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    scatter[id[i]] += distance(points.row(i), centroid.row(id[i]));
  }
  for (std::size_t c = 0; c < k; ++c) {
    scatter[c] /= static_cast<double>(size[c]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) {
        continue;
      }
      auto const d = distance(centroid.row(i), centroid.row(j));
      if (d == 0.0) {
        throw data_error("degenerate centroids");
      }
      worst = std::max(worst, (scatter[i] + scatter[j]) / d);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

matrix standardize(matrix const& points) {
  auto const n = points.rows();
  auto const f = points.cols();
  matrix out{n, f};
  for (std::size_t d = 0; d < f; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += points(i, d);
    }
    mean /= static_cast<double>(std::max<std::size_t>(n, 1));
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      var += (points(i, d) - mean) * (points(i, d) - mean);
    }
    auto const sd = std::sqrt(var / static_cast<double>(std::max<std::size_t>(n, 1)));
    for (std::size_t i = 0; i < n; ++i) {
      out(i, d) = sd > 0.0 ? (points(i, d) - mean) / sd : 0.0;
    }
  }
  return out;
}

clustering_scores cluster_quality(matrix const& points, std::span<int const> labels,
                                  std::size_t cap, std::uint64_t seed, unsigned threads) {
  auto const z = standardize(points);
  try {
    return {silhouette(z, labels, cap, seed, threads), davies_bouldin(z, labels), false};
  } catch (data_error const&) {
    return {-1.0, std::numeric_limits<double>::infinity(), true};
  }
}

std::string report_json(classification_report const& r,
                        std::optional<clustering_scores> const& clustering) {
  using nlohmann::json;
  json j;
  j["samples"] = r.samples;
  auto classes = json::array();
  auto flags = json::array();
  for (std::size_t k = 0; k < r.class_names.size(); ++k) {
    auto const& s = r.per_class[k];
    classes.push_back({{"class", r.class_names[k]},
                       {"support", s.support},
                       {"tp", s.tp},
                       {"fp", s.fp},
                       {"fn", s.fn},
                       {"tn", s.tn},
                       {"accuracy", s.accuracy},
                       {"precision", s.precision},
                       {"recall", s.recall}});
    if (s.precision_undefined) {
      flags.push_back("precision_undefined:" + r.class_names[k]);
    }
    if (s.recall_undefined) {
      flags.push_back("recall_undefined:" + r.class_names[k]);
    }
  }
  j["per_class"] = std::move(classes);
  j["weighted"] = {{"accuracy", r.weighted_accuracy},
                   {"precision", r.weighted_precision},
                   {"recall", r.weighted_recall}};
  j["overall_accuracy"] = r.overall_accuracy;
  j["confusion"] = {{"classes", r.matrix.class_names}, {"counts", r.matrix.counts}};
  if (clustering) {
    if (clustering->degenerate) {
      flags.push_back("clustering_degenerate");
      j["clustering"] = {{"silhouette", nullptr}, {"davies_bouldin", nullptr}};
    } else {
      j["clustering"] = {{"silhouette", clustering->silhouette},
                         {"davies_bouldin", clustering->davies_bouldin}};
    }
  }
  j["flags"] = std::move(flags);
  return j.dump(2);
}

}  // namespace tripinfer::metrics

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

#include "tripinfer/explain.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tripinfer/common.h"
#include "tripinfer/csv.h"
#include "tripinfer/parallel.h"
#include "tripinfer/random.h"

namespace tripinfer::explain {

namespace {

struct path_element {
  int feature{};
  double zero_fraction{};
  double one_fraction{};
  double weight{};
};

using path = std::vector<path_element>;

void extend(path& p, std::size_t depth, double zero, double one, int feature) {
  p.resize(depth + 1);
  p[depth] = {feature, zero, one, depth == 0 ? 1.0 : 0.0};
  auto const d = static_cast<double>(depth);
  for (auto i = depth; i-- > 0;) {
    auto const fi = static_cast<double>(i);
    p[i + 1].weight += one * p[i].weight * (fi + 1.0) / (d + 1.0);
    p[i].weight = zero * p[i].weight * (d - fi) / (d + 1.0);
  }
}

void unwind(path& p, std::size_t depth, std::size_t index) {
  auto const one = p[index].one_fraction;
  auto const zero = p[index].zero_fraction;
  auto const d = static_cast<double>(depth);
  auto next = p[depth].weight;
  for (auto i = depth; i-- > 0;) {
    auto const fi = static_cast<double>(i);
    if (one != 0.0) {
      auto const tmp = p[i].weight;
      p[i].weight = next * (d + 1.0) / ((fi + 1.0) * one);
      next = tmp - p[i].weight * zero * (d - fi) / (d + 1.0);
    } else {
      p[i].weight = p[i].weight * (d + 1.0) / (zero * (d - fi));
    }
  }
  for (auto i = index; i < depth; ++i) {
    p[i].feature = p[i + 1].feature;
    p[i].zero_fraction = p[i + 1].zero_fraction;
    p[i].one_fraction = p[i + 1].one_fraction;
  }
  p.resize(depth);
}

double unwound_sum(path const& p, std::size_t depth, std::size_t index) {
  auto const one = p[index].one_fraction;
  auto const zero = p[index].zero_fraction;
  auto const d = static_cast<double>(depth);
  auto next = p[depth].weight;
  double total = 0.0;
  for (auto i = depth; i-- > 0;) {
    auto const fi = static_cast<double>(i);
    if (one != 0.0) {
      auto const tmp = next * (d + 1.0) / ((fi + 1.0) * one);
      total += tmp;
      next = p[i].weight - tmp * zero * (d - fi) / (d + 1.0);
    } else if (zero != 0.0) {
      total += p[i].weight / zero / ((d - fi) / (d + 1.0));
    }
  }
  return total;
}

bool goes_left(gbdt::tree_node const& n, double v) {
  return (v == kMissing || std::isnan(v)) ? n.default_left : v < n.threshold;
}

void recurse(gbdt::tree const& t, int node, std::span<double const> row, std::span<double> phi,
             path p, std::size_t depth, double zero, double one, int feature) {
  extend(p, depth, zero, one, feature);
  auto const& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    for (std::size_t i = 1; i <= depth; ++i) {
      auto const w = unwound_sum(p, depth, i);
      phi[static_cast<std::size_t>(p[i].feature)] +=
          w * (p[i].one_fraction - p[i].zero_fraction) * n.weight;
    }
    return;
  }
  auto const hot = goes_left(n, row[static_cast<std::size_t>(n.feature)]) ? n.left : n.right;
  auto const cold = hot == n.left ? n.right : n.left;
  auto const cover = n.cover;
  auto const hot_cover = t.nodes[static_cast<std::size_t>(hot)].cover;
  auto const cold_cover = t.nodes[static_cast<std::size_t>(cold)].cover;

  double incoming_zero = 1.0;
  double incoming_one = 1.0;
  for (std::size_t k = 1; k <= depth; ++k) {
    if (p[k].feature == n.feature) {
      incoming_zero = p[k].zero_fraction;
      incoming_one = p[k].one_fraction;
      unwind(p, depth, k);
      --depth;
      break;
    }
  }
  auto const hot_zero = cover > 0.0 ? hot_cover / cover : 0.5;
  auto const cold_zero = cover > 0.0 ? cold_cover / cover : 0.5;
  recurse(t, hot, row, phi, p, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature);
  recurse(t, cold, row, phi, p, depth + 1, cold_zero * incoming_zero, 0.0, n.feature);
}

double expected_value(gbdt::tree const& t, int node) {
  auto const& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    return n.weight;
  }
  auto const& l = t.nodes[static_cast<std::size_t>(n.left)];
  auto const& r = t.nodes[static_cast<std::size_t>(n.right)];
  auto const total = l.cover + r.cover;
  auto const wl = total > 0.0 ? l.cover / total : 0.5;
  return wl * expected_value(t, n.left) + (1.0 - wl) * expected_value(t, n.right);
}

}  // namespace

double tree_shap(gbdt::tree const& t, std::span<double const> row, std::span<double> phi) {
  recurse(t, 0, row, phi, path{}, 0, 1.0, 1.0, -1);
  return expected_value(t, 0);
}

attribution shap_values(gbdt::tree_ensemble const& model, std::span<double const> row) {
  if (row.size() != model.num_features) {
    throw std::invalid_argument("shap: row has " + std::to_string(row.size()) +
                                " features, model expects " + std::to_string(model.num_features));
  }
  attribution a{matrix{model.num_classes, model.num_features}, model.base_score};
  for (std::size_t i = 0; i < model.trees.size(); ++i) {
    auto const c = i % model.num_classes;
    a.base[c] += tree_shap(model.trees[i], row, a.phi.row(c));
  }
  return a;
}

std::vector<std::vector<feature_rank>> mean_abs_shap(gbdt::tree_ensemble const& model,
                                                     matrix const& rows, group_fn const& group,
                                                     unsigned threads) {
  if (rows.rows() == 0) {
    throw data_error("mean_abs_shap: empty dataset");
  }
  auto const c_count = model.num_classes;
  auto const f_count = model.num_features;
  // Per-row values land in fixed slots, then are summed in row order.
  std::vector<matrix> per_row(rows.rows());
  parallel_for(rows.rows(), threads, [&](std::size_t i) {
    per_row[i] = shap_values(model, rows.row(i)).phi;
  });
  matrix sum{c_count, f_count};
  for (auto const& m : per_row) {
    for (std::size_t c = 0; c < c_count; ++c) {
      for (std::size_t f = 0; f < f_count; ++f) {
        sum(c, f) += std::abs(m(c, f));
      }
    }
  }
  std::vector<std::vector<feature_rank>> table(c_count);
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t f = 0; f < f_count; ++f) {
      table[c].push_back(feature_rank{
          f, f < model.feature_names.size() ? model.feature_names[f] : "f" + std::to_string(f),
          group ? std::string{group(f)} : std::string{}, sum(c, f) / static_cast<double>(rows.rows()),
          0});
    }
    std::stable_sort(begin(table[c]), end(table[c]), [](feature_rank const& a, feature_rank const& b) {
      return a.mean_abs > b.mean_abs;
    });
    for (std::size_t k = 0; k < table[c].size(); ++k) {
      table[c][k].rank = k + 1;
    }
  }
  return table;
}

void write_attribution(std::ostream& out, std::vector<std::vector<feature_rank>> const& table,
                       std::span<std::string const> class_names) {
  csv::write_row(out, {"class", "feature", "group", "mean_abs_shap", "rank"});
  for (std::size_t c = 0; c < table.size(); ++c) {
    auto const cls = c < class_names.size() ? class_names[c] : std::to_string(c);
    for (auto const& r : table[c]) {
      csv::write_row(out, {cls, r.name, r.group, csv::format_double(r.mean_abs), std::to_string(r.rank)});
    }
  }
}

std::vector<double> permutation_importance(gbdt::tree_ensemble const& model, matrix const& rows,
                                           std::span<int const> labels,
                                           gbdt::metric_fn const& metric, int repeats,
                                           std::uint64_t seed, unsigned threads) {
  if (repeats < 1) {
    throw usage_error("permutation_importance: repeats must be >= 1");
  }
  auto const baseline = metric(labels, gbdt::predict_proba(model, rows, threads));
  std::vector<double> drop(rows.cols(), 0.0);
  rng random{seed};
  for (std::size_t f = 0; f < rows.cols(); ++f) {
    for (int r = 0; r < repeats; ++r) {
      std::vector<double> column(rows.rows());
      for (std::size_t i = 0; i < rows.rows(); ++i) {
        column[i] = rows(i, f);
      }
      random.shuffle(std::span<double>{column});
      auto shuffled = rows;
      for (std::size_t i = 0; i < rows.rows(); ++i) {
        shuffled(i, f) = column[i];
      }
      drop[f] += baseline - metric(labels, gbdt::predict_proba(model, shuffled, threads));
    }
    drop[f] /= static_cast<double>(repeats);
  }
  return drop;
}

}  // namespace tripinfer::explain

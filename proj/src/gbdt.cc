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

#include "tripinfer/gbdt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"

#include "tripinfer/common.h"
#include "tripinfer/parallel.h"
#include "tripinfer/random.h"

namespace tripinfer::gbdt {

namespace {

bool is_missing(double v) { return v == kMissing || std::isnan(v); }

struct grad_pair {
  double g{};
  double h{};
};

struct candidate {
  double gain{-std::numeric_limits<double>::infinity()};
  int feature{std::numeric_limits<int>::max()};
  double threshold{};
  bool default_left{true};

  bool valid() const { return feature != std::numeric_limits<int>::max(); }
};

// Total order used to pick a split: higher gain, then lower feature index,
// then lower threshold, then missing-goes-left.
bool better(candidate const& a, candidate const& b) {
  if (a.gain != b.gain) {
    return a.gain > b.gain;
  }
  if (a.feature != b.feature) {
    return a.feature < b.feature;
  }
  if (a.threshold != b.threshold) {
    return a.threshold < b.threshold;
  }
  return a.default_left && !b.default_left;
}

double score(double g, double h, double lambda) {
  auto const d = h + lambda;
  return d > 0.0 ? g * g / d : 0.0;
}

double leaf_weight(double g, double h, double lambda, double eta) {
  auto const d = h + lambda;
  return d > 0.0 ? -eta * g / d : 0.0;
}

// Column-wise presorted view of the training matrix.
struct sorted_columns {
  std::vector<std::vector<std::uint32_t>> present;  // row ids ascending by value
  std::vector<std::vector<std::uint32_t>> missing;

  explicit sorted_columns(matrix const& x, unsigned threads) : present(x.cols()), missing(x.cols()) {
    parallel_for(x.cols(), threads, [&](std::size_t f) {
      for (std::uint32_t r = 0; r < x.rows(); ++r) {
        (is_missing(x(r, f)) ? missing[f] : present[f]).push_back(r);
      }
      std::stable_sort(begin(present[f]), end(present[f]),
                       [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    });
  }
};

struct node_stats {
  double g{};
  double h{};
  std::size_t count{};
};

class tree_builder {
public:
  tree_builder(matrix const& x, sorted_columns const& cols, train_config const& cfg,
               unsigned threads)
      : x_{x}, cols_{cols}, cfg_{cfg}, threads_{threads} {}

  // `active[r]` selects the rows of this round's sample.
  tree build(std::span<grad_pair const> gh, std::span<std::uint8_t const> active,
             std::span<int const> features) {
    tree t;
    node_of_.assign(x_.rows(), -1);
    node_stats root;
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      if (active[r] != 0) {
        node_of_[r] = 0;
        root.g += gh[r].g;
        root.h += gh[r].h;
        ++root.count;
      }
    }
    t.nodes.push_back(tree_node{.cover = static_cast<double>(root.count)});
    std::vector<node_stats> stats{root};
    std::vector<int> frontier{0};

    for (int depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
      frontier_pos_.assign(t.nodes.size(), -1);
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        frontier_pos_[static_cast<std::size_t>(frontier[k])] = static_cast<int>(k);
      }

      // Best split per (feature, frontier node), reduced in feature order.
      std::vector<std::vector<candidate>> per_feature(features.size());
      parallel_for(features.size(), threads_, [&](std::size_t i) {
        per_feature[i] = scan_feature(features[i], gh, frontier, stats);
      });
      std::vector<candidate> best(frontier.size());
      for (auto const& cands : per_feature) {
        for (std::size_t k = 0; k < frontier.size(); ++k) {
          if (cands[k].valid() && (!best[k].valid() || better(cands[k], best[k]))) {
            best[k] = cands[k];
          }
        }
      }

      std::vector<int> next;
      std::vector<int> child_of(frontier.size(), -1);
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        if (!best[k].valid() || !(best[k].gain > 0.0)) {
          continue;
        }
        auto const id = frontier[k];
        auto const left = static_cast<int>(t.nodes.size());
        t.nodes.push_back(tree_node{});
        t.nodes.push_back(tree_node{});
        stats.emplace_back();
        stats.emplace_back();
        auto& n = t.nodes[static_cast<std::size_t>(id)];
        n.feature = best[k].feature;
        n.threshold = best[k].threshold;
        n.default_left = best[k].default_left;
        n.left = left;
        n.right = left + 1;
        child_of[k] = left;
        next.push_back(left);
        next.push_back(left + 1);
      }
      if (next.empty()) {
        break;
      }
      for (std::size_t r = 0; r < x_.rows(); ++r) {
        auto const node = node_of_[r];
        if (node < 0 || frontier_pos_[static_cast<std::size_t>(node)] < 0) {
          continue;
        }
        auto const k = static_cast<std::size_t>(frontier_pos_[static_cast<std::size_t>(node)]);
        if (child_of[k] < 0) {
          node_of_[r] = -1;  // finished leaf
          continue;
        }
        auto const& n = t.nodes[static_cast<std::size_t>(node)];
        auto const v = x_(r, static_cast<std::size_t>(n.feature));
        auto const go_left = is_missing(v) ? n.default_left : v < n.threshold;
        auto const child = go_left ? n.left : n.right;
        node_of_[r] = child;
        auto& s = stats[static_cast<std::size_t>(child)];
        s.g += gh[r].g;
        s.h += gh[r].h;
        ++s.count;
      }
      for (auto const c : next) {
        t.nodes[static_cast<std::size_t>(c)].cover =
            static_cast<double>(stats[static_cast<std::size_t>(c)].count);
      }
      frontier = std::move(next);
    }

    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      if (t.nodes[i].is_leaf()) {
        t.nodes[i].weight = leaf_weight(stats[i].g, stats[i].h, cfg_.lambda, cfg_.eta);
      }
    }
    return t;
  }

private:
  std::vector<candidate> scan_feature(int feature, std::span<grad_pair const> gh,
                                      std::vector<int> const& frontier,
                                      std::vector<node_stats> const& stats) const {
    auto const f = static_cast<std::size_t>(feature);
    auto const k_count = frontier.size();
    std::vector<candidate> best(k_count);
    std::vector<node_stats> miss(k_count);
    std::vector<node_stats> acc(k_count);
    std::vector<double> last(k_count);
    std::vector<std::uint8_t> has_last(k_count, 0);

    auto const pos_of = [&](std::uint32_t r) -> int {
      auto const node = node_of_[r];
      return node < 0 ? -1 : frontier_pos_[static_cast<std::size_t>(node)];
    };

    for (auto const r : cols_.missing[f]) {
      auto const k = pos_of(r);
      if (k >= 0) {
        miss[static_cast<std::size_t>(k)].g += gh[r].g;
        miss[static_cast<std::size_t>(k)].h += gh[r].h;
        ++miss[static_cast<std::size_t>(k)].count;
      }
    }

    auto const consider = [&](std::size_t k, node_stats const& l, double threshold,
                              bool default_left) {
      auto const& total = stats[static_cast<std::size_t>(frontier[k])];
      auto const r = node_stats{total.g - l.g, total.h - l.h, total.count - l.count};
      if (l.count == 0 || r.count == 0 || l.h < cfg_.min_child_hessian ||
          r.h < cfg_.min_child_hessian) {
        return;
      }
      auto const gain = 0.5 * (score(l.g, l.h, cfg_.lambda) + score(r.g, r.h, cfg_.lambda) -
                               score(total.g, total.h, cfg_.lambda)) -
                        cfg_.gamma;
      auto const c = candidate{gain, feature, threshold, default_left};
      if (!best[k].valid() || better(c, best[k])) {
        best[k] = c;
      }
    };

    for (auto const r : cols_.present[f]) {
      auto const kk = pos_of(r);
      if (kk < 0) {
        continue;
      }
      auto const k = static_cast<std::size_t>(kk);
      auto const v = x_(r, f);
      if (has_last[k] != 0 && v > last[k]) {
        auto threshold = 0.5 * (last[k] + v);
        if (!(threshold > last[k])) {
          threshold = v;
        }
        consider(k, acc[k], threshold, false);
        if (miss[k].count != 0) {
          consider(k,
                   node_stats{acc[k].g + miss[k].g, acc[k].h + miss[k].h,
                              acc[k].count + miss[k].count},
                   threshold, true);
        }
      }
      acc[k].g += gh[r].g;
      acc[k].h += gh[r].h;
      ++acc[k].count;
      last[k] = v;
      has_last[k] = 1;
    }

    // Present-versus-missing split: every observed value goes left.
    for (std::size_t k = 0; k < k_count; ++k) {
      if (has_last[k] != 0 && miss[k].count != 0) {
        consider(k, acc[k], last[k] + std::max(1.0, std::abs(last[k])), false);
      }
    }
    return best;
  }

  matrix const& x_;
  sorted_columns const& cols_;
  train_config const& cfg_;
  unsigned threads_;
  std::vector<int> node_of_;
  std::vector<int> frontier_pos_;
};

void check_training_data(matrix const& x, std::span<int const> labels, std::size_t num_classes) {
  if (num_classes < 2) {
    throw data_error("train: need at least two classes");
  }
  if (labels.size() != x.rows()) {
    throw std::invalid_argument("train: label count does not match rows");
  }
  if (x.rows() < num_classes) {
    throw data_error("train: fewer rows than classes");
  }
  for (auto const v : x.data()) {
    if (!std::isfinite(v)) {
      throw data_error("train: non-finite feature value");
    }
  }
  auto const counts = class_counts(labels, num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw data_error("train: class " + std::to_string(c) + " has no rows");
    }
  }
}

void record(train_trace* trace, matrix const& margins, std::span<int const> labels,
            std::span<double const> weights, std::vector<tree> const& trees,
            train_config const& cfg) {
  if (trace == nullptr) {
    return;
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < margins.rows(); ++i) {
    auto const p = softmax(margins.row(i));
    loss -= weights[i] * std::log(std::max(p[static_cast<std::size_t>(labels[i])], kProbabilityFloor));
  }
  double reg = 0.0;
  for (auto const& t : trees) {
    reg += tree_regularization(t, cfg.gamma, cfg.lambda);
  }
  trace->loss.push_back(loss);
  trace->regularization.push_back(reg);
  trace->objective.push_back(loss + reg);
}

}  // namespace

void train_config::validate() const {
  auto const fail = [](char const* what) { throw usage_error(std::string{"train config: "} + what); };
  if (!(gamma >= 0.0)) fail("gamma must be >= 0");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must lie in (0, 1]");
  if (max_depth < 1) fail("max_depth must be >= 1");
  if (rounds < 1) fail("rounds must be >= 1");
  if (!(min_child_hessian >= 0.0)) fail("min_child_hessian must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must lie in (0, 1]");
  if (!(colsample > 0.0 && colsample <= 1.0)) fail("colsample must lie in (0, 1]");
}

int tree::leaf_index(std::span<double const> row) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    auto const& n = nodes[static_cast<std::size_t>(i)];
    auto const v = row[static_cast<std::size_t>(n.feature)];
    i = (is_missing(v) ? n.default_left : v < n.threshold) ? n.left : n.right;
  }
  return i;
}

std::size_t tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(begin(nodes), end(nodes), [](tree_node const& n) { return n.is_leaf(); }));
}

std::vector<double> tree_ensemble::margins(std::span<double const> row) const {
  if (row.size() != num_features) {
    throw std::invalid_argument("predict: row has " + std::to_string(row.size()) +
                                " features, model expects " + std::to_string(num_features));
  }
  std::vector<double> m = base_score;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    m[i % num_classes] += trees[i].predict(row);
  }
  return m;
}

std::vector<double> tree_ensemble::predict_proba(std::span<double const> row) const {
  return softmax(margins(row));
}

std::vector<double> softmax(std::span<double const> margins) {
  std::vector<double> p(margins.size());
  if (margins.empty()) {
    return p;
  }
  auto const mx = *std::max_element(margins.begin(), margins.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < margins.size(); ++c) {
    p[c] = std::exp(margins[c] - mx);
    sum += p[c];
  }
  for (auto& v : p) {
    v /= sum;
  }
  return p;
}

std::vector<std::size_t> class_counts(std::span<int const> labels, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (auto const y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

double weighted_ce_loss(matrix const& probabilities, std::span<int const> labels,
                        std::span<std::size_t const> counts, bool* clamped) {
  if (probabilities.rows() != labels.size() || labels.empty()) {
    throw std::invalid_argument("weighted_ce_loss: shape mismatch or empty input");
  }
  double total = 0.0;
  bool any_clamp = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto const y = static_cast<std::size_t>(labels[i]);
    if (y >= probabilities.cols() || y >= counts.size() || counts[y] == 0) {
      throw std::invalid_argument("weighted_ce_loss: label without class count");
    }
    auto p = probabilities(i, y);
    if (p < kProbabilityFloor) {
      p = kProbabilityFloor;
      any_clamp = true;
    }
    total += std::log(p) / static_cast<double>(counts[y]);
  }
  if (clamped != nullptr) {
    *clamped = any_clamp;
  }
  return -total / static_cast<double>(labels.size());
}

std::vector<double> class_balanced_weights(std::span<int const> labels, std::size_t num_classes) {
  auto const counts = class_counts(labels, num_classes);
  auto const present = static_cast<double>(
      std::count_if(begin(counts), end(counts), [](std::size_t n) { return n != 0; }));
  auto const n = static_cast<double>(labels.size());
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    w[i] = n / (present * static_cast<double>(counts[static_cast<std::size_t>(labels[i])]));
  }
  return w;
}

gradients softmax_grad_hess(matrix const& margins, std::span<int const> labels,
                            std::span<double const> sample_weights) {
  if (margins.rows() != labels.size() || labels.size() != sample_weights.size()) {
    throw std::invalid_argument("softmax_grad_hess: shape mismatch");
  }
  gradients out{matrix{margins.rows(), margins.cols()}, matrix{margins.rows(), margins.cols()}};
  for (std::size_t i = 0; i < margins.rows(); ++i) {
    auto const p = softmax(margins.row(i));
    auto const w = sample_weights[i];
    for (std::size_t c = 0; c < margins.cols(); ++c) {
      auto const target = static_cast<std::size_t>(labels[i]) == c ? 1.0 : 0.0;
      out.grad(i, c) = w * (p[c] - target);
      out.hess(i, c) = w * p[c] * (1.0 - p[c]);
    }
  }
  return out;
}

double tree_regularization(tree const& t, double gamma, double lambda) {
  double leaves = 0.0;
  double sq = 0.0;
  for (auto const& n : t.nodes) {
    if (n.is_leaf()) {
      leaves += 1.0;
      sq += n.weight * n.weight;
    }
  }
  return gamma * leaves + 0.5 * lambda * sq;
}

tree_ensemble train(matrix const& features, std::span<int const> labels, std::size_t num_classes,
                    train_config const& config, unsigned threads, train_trace* trace) {
  check_training_data(features, labels, num_classes);
  auto const w = class_balanced_weights(labels, num_classes);
  return train_weighted(features, labels, w, num_classes, config, threads, trace);
}

tree_ensemble train_weighted(matrix const& features, std::span<int const> labels,
                             std::span<double const> weights, std::size_t num_classes,
                             train_config const& config, unsigned threads, train_trace* trace) {
  config.validate();
  check_training_data(features, labels, num_classes);
  if (weights.size() != labels.size()) {
    throw std::invalid_argument("train: weight count does not match rows");
  }

  auto const n = features.rows();
  auto const n_features = features.cols();
  tree_ensemble model;
  model.num_classes = num_classes;
  model.num_features = n_features;
  model.base_score.assign(num_classes, 0.0);
  model.config = config;

  sorted_columns const cols{features, threads};
  tree_builder builder{features, cols, config, threads};
  rng random{config.seed};

  matrix margins{n, num_classes};
  record(trace, margins, labels, weights, model.trees, config);

  std::vector<grad_pair> gh(n);
  std::vector<std::uint8_t> active(n, 1);
  std::vector<int> all_features(n_features);
  std::iota(begin(all_features), end(all_features), 0);

  for (int round = 0; round < config.rounds; ++round) {
    auto const grads = softmax_grad_hess(margins, labels, weights);
    if (config.subsample < 1.0) {
      for (auto& a : active) {
        a = random.bernoulli(config.subsample) ? 1 : 0;
      }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        gh[i] = grad_pair{grads.grad(i, c), grads.hess(i, c)};
      }
      std::vector<int> chosen = all_features;
      if (config.colsample < 1.0) {
        random.shuffle(std::span<int>{chosen});
        auto const keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(config.colsample * static_cast<double>(n_features))));
        chosen.resize(std::min(keep, chosen.size()));
        std::sort(begin(chosen), end(chosen));
      }
      model.trees.push_back(builder.build(gh, active, chosen));
      auto const& t = model.trees.back();
      for (std::size_t i = 0; i < n; ++i) {
        margins(i, c) += t.predict(features.row(i));
      }
    }
    record(trace, margins, labels, weights, model.trees, config);
  }
  return model;
}

matrix predict_margins(tree_ensemble const& model, matrix const& features, unsigned threads) {
  matrix out{features.rows(), model.num_classes};
  parallel_for(features.rows(), threads, [&](std::size_t i) {
    auto const m = model.margins(features.row(i));
    std::copy(begin(m), end(m), out.row(i).begin());
  });
  return out;
}

matrix predict_proba(tree_ensemble const& model, matrix const& features, unsigned threads) {
  matrix out{features.rows(), model.num_classes};
  parallel_for(features.rows(), threads, [&](std::size_t i) {
    auto const p = model.predict_proba(features.row(i));
    std::copy(begin(p), end(p), out.row(i).begin());
  });
  return out;
}

int argmax(std::span<double const> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<int> argmax_rows(matrix const& m) {
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out[i] = argmax(m.row(i));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char const* kFormat = "tripinfer.gbdt";
constexpr int kVersion = 1;

}  // namespace

std::string to_json(tree_ensemble const& model) {
  using nlohmann::json;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["num_classes"] = model.num_classes;
  j["num_features"] = model.num_features;
  j["class_names"] = model.class_names;
  j["feature_names"] = model.feature_names;
  j["base_score"] = model.base_score;
  auto const& c = model.config;
  j["config"] = {{"gamma", c.gamma},
                 {"lambda", c.lambda},
                 {"eta", c.eta},
                 {"max_depth", c.max_depth},
                 {"rounds", c.rounds},
                 {"min_child_hessian", c.min_child_hessian},
                 {"subsample", c.subsample},
                 {"colsample", c.colsample},
                 {"seed", c.seed}};
  auto trees = json::array();
  for (std::size_t i = 0; i < model.trees.size(); ++i) {
    json nodes;
    for (auto const& n : model.trees[i].nodes) {
      nodes["feature"].push_back(n.feature);
      nodes["threshold"].push_back(n.threshold);
      nodes["default_left"].push_back(n.default_left);
      nodes["left"].push_back(n.left);
      nodes["right"].push_back(n.right);
      nodes["weight"].push_back(n.weight);
      nodes["cover"].push_back(n.cover);
    }
    trees.push_back({{"round", i / model.num_classes},
                     {"class", i % model.num_classes},
                     {"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j.dump(1);
}

tree_ensemble from_json(std::string const& text) {
  using nlohmann::json;
  try {
    auto const j = json::parse(text);
    if (j.at("format") != kFormat) {
      throw data_error("model: unexpected format tag");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw data_error("model: unsupported version " + j.at("version").dump());
    }
    tree_ensemble m;
    m.num_classes = j.at("num_classes").get<std::size_t>();
    m.num_features = j.at("num_features").get<std::size_t>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.base_score = j.at("base_score").get<std::vector<double>>();
    auto const& c = j.at("config");
    m.config.gamma = c.at("gamma").get<double>();
    m.config.lambda = c.at("lambda").get<double>();
    m.config.eta = c.at("eta").get<double>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.rounds = c.at("rounds").get<int>();
    m.config.min_child_hessian = c.at("min_child_hessian").get<double>();
    m.config.subsample = c.at("subsample").get<double>();
    m.config.colsample = c.at("colsample").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    for (auto const& jt : j.at("trees")) {
      auto const& jn = jt.at("nodes");
      tree t;
      auto const count = jn.at("feature").size();
      t.nodes.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        auto& n = t.nodes[k];
        n.feature = jn.at("feature")[k].get<int>();
        n.threshold = jn.at("threshold")[k].get<double>();
        n.default_left = jn.at("default_left")[k].get<bool>();
        n.left = jn.at("left")[k].get<int>();
        n.right = jn.at("right")[k].get<int>();
        n.weight = jn.at("weight")[k].get<double>();
        n.cover = jn.at("cover")[k].get<double>();
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= count ||
                             static_cast<std::size_t>(n.right) >= count ||
                             static_cast<std::size_t>(n.feature) >= m.num_features ||
                             !std::isfinite(n.threshold))) {
          throw data_error("model: malformed split node");
        }
      }
      if (count == 0) {
        throw data_error("model: empty tree");
      }
      m.trees.push_back(std::move(t));
    }
    if (m.num_classes < 2 || m.base_score.size() != m.num_classes ||
        m.trees.size() % m.num_classes != 0) {
      throw data_error("model: inconsistent class count");
    }
    return m;
  } catch (json::exception const& e) {
    throw data_error(std::string{"model: "} + e.what());
  }
}

void save(tree_ensemble const& model, std::filesystem::path const& path) {
  std::ofstream out{path, std::ios::binary};
  if (!out) {
    throw data_error("cannot write model to " + path.string());
  }
  out << to_json(model) << '\n';
}

tree_ensemble load(std::filesystem::path const& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw data_error("cannot read model from " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------

index_split stratified_split(std::span<int const> labels, std::size_t num_classes,
                             double validation_fraction, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  rng random{seed};
  index_split s;
  for (auto& rows : by_class) {
    random.shuffle(std::span<std::size_t>{rows});
    auto n_val = static_cast<std::size_t>(
        std::llround(validation_fraction * static_cast<double>(rows.size())));
    if (!rows.empty()) {
      n_val = std::min(n_val, rows.size() - 1);
    }
    s.validation.insert(end(s.validation), begin(rows), begin(rows) + static_cast<std::ptrdiff_t>(n_val));
    s.train.insert(end(s.train), begin(rows) + static_cast<std::ptrdiff_t>(n_val), end(rows));
  }
  std::sort(begin(s.train), end(s.train));
  std::sort(begin(s.validation), end(s.validation));
  return s;
}

double accuracy_metric(std::span<int const> truth, matrix const& probabilities) {
  if (truth.empty()) {
    return 0.0;
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    hits += argmax(probabilities.row(i)) == truth[i] ? 1U : 0U;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

grid_search_result grid_search(matrix const& features, std::span<int const> labels,
                               std::size_t num_classes, std::span<train_config const> grid,
                               double validation_fraction, metric_fn const& metric,
                               std::uint64_t seed, unsigned threads) {
  if (grid.empty()) {
    throw usage_error("grid_search: empty candidate grid");
  }
  grid_search_result result;
  if (grid.size() == 1) {
    result.best = grid.front();
    result.scores.push_back(std::numeric_limits<double>::quiet_NaN());
    return result;
  }
  auto const split = stratified_split(labels, num_classes, validation_fraction, seed);
  auto const x_train = select_rows(features, split.train);
  auto const x_val = select_rows(features, split.validation);
  std::vector<int> y_train;
  std::vector<int> y_val;
  for (auto const i : split.train) {
    y_train.push_back(labels[i]);
  }
  for (auto const i : split.validation) {
    y_val.push_back(labels[i]);
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto const model = train(x_train, y_train, num_classes, grid[k], threads);
    auto const s = metric(y_val, predict_proba(model, x_val, threads));
    result.scores.push_back(s);
    if (k == 0 || s > result.scores[result.best_index]) {
      result.best_index = k;
    }
  }
  result.best = grid[result.best_index];
  return result;
}

}  // namespace tripinfer::gbdt

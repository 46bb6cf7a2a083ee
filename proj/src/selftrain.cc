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

#include "tripinfer/selftrain.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tripinfer/common.h"
#include "tripinfer/csv.h"

namespace tripinfer::selftrain {

std::vector<std::size_t> compute_sigma(matrix const& probabilities, double tau) {
  std::vector<std::size_t> sigma(probabilities.cols(), 0);
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    auto const row = probabilities.row(i);
    auto const c = static_cast<std::size_t>(gbdt::argmax(row));
    if (row[c] > tau) {
      ++sigma[c];
    }
  }
  return sigma;
}

beta_result compute_beta(std::span<std::size_t const> sigma, std::size_t n) {
  auto const total = std::accumulate(sigma.begin(), sigma.end(), std::size_t{0});
  if (total > n) {
    throw std::invalid_argument("compute_beta: sigma sums past N");
  }
  beta_result r;
  r.unused = n - total;
  auto const top = sigma.empty() ? std::size_t{0} : *std::max_element(sigma.begin(), sigma.end());
  r.warmup = top < r.unused;
  auto const denom = r.warmup ? std::max(top, r.unused) : top;
  r.beta.assign(sigma.size(), 0.0);
  if (denom != 0) {
    for (std::size_t c = 0; c < sigma.size(); ++c) {
      r.beta[c] = static_cast<double>(sigma[c]) / static_cast<double>(denom);
    }
  }
  return r;
}

std::vector<double> flexible_thresholds(std::span<double const> beta, double tau, double tau_min) {
  std::vector<double> t(beta.size());
  for (std::size_t c = 0; c < beta.size(); ++c) {
    t[c] = std::max(beta[c] * tau, tau_min);
  }
  return t;
}

pseudo_label_set pseudo_label(matrix const& probabilities, std::span<double const> thresholds,
                              int iteration) {
  pseudo_label_set s;
  s.iteration = iteration;
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    auto const row = probabilities.row(i);
    auto const c = gbdt::argmax(row);
    if (row[static_cast<std::size_t>(c)] > thresholds[static_cast<std::size_t>(c)]) {
      s.rows.push_back(i);
      s.labels.push_back(c);
      s.confidence.push_back(row[static_cast<std::size_t>(c)]);
    }
  }
  return s;
}

void config::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw usage_error("selftrain: tau must lie in (0, 1)");
  }
  if (!(tau_min >= 0.0 && tau_min <= tau)) {
    throw usage_error("selftrain: tau_min must lie in [0, tau]");
  }
  if (max_iters < 0) {
    throw usage_error("selftrain: max_iters must be >= 0");
  }
}

bool improves(metrics::clustering_scores const& candidate, metrics::clustering_scores const& best) {
  if (candidate.silhouette != best.silhouette) {
    return candidate.silhouette > best.silhouette;
  }
  return candidate.davies_bouldin < best.davies_bouldin;
}

result teacher_student_loop(matrix const& labeled, std::span<int const> labels,
                            matrix const& unlabeled, std::size_t num_classes,
                            gbdt::train_config const& train, config const& cfg, unsigned threads,
                            scorer_fn scorer) {
  cfg.validate();
  if (!scorer) {
    scorer = [&](matrix const& x, std::span<int const> predicted) {
      return metrics::cluster_quality(x, predicted, cfg.score_cap, cfg.seed, threads);
    };
  }
  if (unlabeled.rows() != 0 && unlabeled.cols() != labeled.cols()) {
    throw std::invalid_argument("selftrain: labeled and unlabeled feature layouts differ");
  }

  result r;
  r.teacher = gbdt::train(labeled, labels, num_classes, train, threads);
  r.model = r.teacher;

  auto const score_of = [&](matrix const& probs) {
    if (unlabeled.rows() == 0) {
      return metrics::clustering_scores{-1.0, 0.0, true};
    }
    return scorer(unlabeled, gbdt::argmax_rows(probs));
  };

  auto probs = gbdt::predict_proba(r.teacher, unlabeled, threads);
  auto best = score_of(probs);
  iteration_record initial;
  initial.scores = best;
  initial.accepted = true;
  r.log.push_back(std::move(initial));
  if (unlabeled.rows() == 0) {
    return r;
  }

  auto teacher = r.teacher;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    iteration_record rec;
    rec.iter = t;
    rec.sigma = compute_sigma(probs, cfg.tau);
    auto const b = compute_beta(rec.sigma, unlabeled.rows());
    rec.beta = b.beta;
    rec.warmup = b.warmup;
    rec.thresholds = flexible_thresholds(rec.beta, cfg.tau, cfg.tau_min);
    auto const pseudo = pseudo_label(probs, rec.thresholds, t);
    rec.pseudo_per_class.assign(num_classes, 0);
    for (auto const l : pseudo.labels) {
      ++rec.pseudo_per_class[static_cast<std::size_t>(l)];
    }

    auto mixed = labeled;
    std::vector<int> mixed_labels(labels.begin(), labels.end());
    for (std::size_t k = 0; k < pseudo.size(); ++k) {
      mixed.append_row(unlabeled.row(pseudo.rows[k]));
      mixed_labels.push_back(pseudo.labels[k]);
    }
    auto student = gbdt::train(mixed, mixed_labels, num_classes, train, threads);
    auto student_probs = gbdt::predict_proba(student, unlabeled, threads);
    rec.scores = score_of(student_probs);
    rec.accepted = improves(rec.scores, best);
    r.log.push_back(rec);
    if (!rec.accepted) {
      break;
    }
    best = rec.scores;
    r.model = student;
    r.best_iteration = t;
    teacher = std::move(student);
    probs = std::move(student_probs);
  }
  return r;
}

void write_log(std::ostream& out, std::span<iteration_record const> log,
               std::span<std::string const> class_names) {
  csv::write_row(out, {"iter", "class", "sigma", "beta", "threshold", "pseudo_count", "silhouette",
                       "db_index"});
  auto const score = [](double v, bool degenerate) {
    return degenerate ? std::string{} : csv::format_double(v);
  };
  for (auto const& rec : log) {
    for (std::size_t c = 0; c < class_names.size(); ++c) {
      auto const has = !rec.sigma.empty();
      csv::write_row(out, {std::to_string(rec.iter), class_names[c],
                           has ? std::to_string(rec.sigma[c]) : "",
                           has ? csv::format_double(rec.beta[c]) : "",
                           has ? csv::format_double(rec.thresholds[c]) : "",
                           has ? std::to_string(rec.pseudo_per_class[c]) : "",
                           score(rec.scores.silhouette, rec.scores.degenerate),
                           score(rec.scores.davies_bouldin, rec.scores.degenerate)});
    }
  }
}

}  // namespace tripinfer::selftrain

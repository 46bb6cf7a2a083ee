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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "nlohmann/json.hpp"
#include "oracles.h"
#include "tripinfer/anchors.h"
#include "tripinfer/explain.h"
#include "tripinfer/features.h"
#include "tripinfer/gbdt.h"
#include "tripinfer/metrics.h"
#include "tripinfer/pipeline.h"
#include "tripinfer/random.h"
#include "tripinfer/selftrain.h"
#include "tripinfer/synth.h"

using namespace tripinfer;
namespace fs = std::filesystem;

namespace {

struct verdict {
  bool pass{};
  std::string detail;
};

std::string fmt(char const* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

nlohmann::json read_json(fs::path const& p) {
  std::ifstream in{p};
  return nlohmann::json::parse(in);
}

fs::path work;
fs::path fixture_dir;

run_config fixture_config(std::string const& out) {
  auto c = load_config(fixture_dir / "fixture.cfg");
  c.out = work / out;
  return c;
}

// ---------------------------------------------------------------------------

verdict gradients() {
  rng r{1};
  double worst_g = 0.0, worst_h = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto const n = 1 + r.below(20);
    auto const C = 2 + r.below(3);
    matrix m{n, C};
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(r.below(C));
      for (std::size_t c = 0; c < C; ++c) m(i, c) = r.normal(0.0, 2.0);
    }
    auto const w = gbdt::class_balanced_weights(y, C);
    auto const gh = gbdt::softmax_grad_hess(m, y, w);
    auto const fd = oracle::finite_differences(m, y, w, 1e-5);
    auto const fd2 = oracle::finite_differences(m, y, w, 1e-3);
    // Relative error with a 1e-3 floor on the scale.
    auto const rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3}); };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < C; ++c) {
        worst_g = std::max(worst_g, rel(gh.grad(i, c), fd.grad(i, c)));
        worst_h = std::max(worst_h, rel(gh.hess(i, c), fd2.hess(i, c)));
      }
    }
  }
  return {worst_g <= 1e-4 && worst_h <= 1e-4,
          fmt("max rel err grad %.2e hess %.2e (limit 1e-4)", worst_g, worst_h)};
}

verdict boosting() {
  auto const d = synth::make_blobs(2000, 4, 5, 3.0, 42);
  gbdt::train_config c;
  c.eta = 0.1;
  c.rounds = 50;
  gbdt::train_trace tr;
  auto const model = gbdt::train(d.x, d.y, 4, c, 1, &tr);
  std::size_t rises = 0;
  for (std::size_t r = 1; r < tr.objective.size(); ++r) {
    if (tr.objective[r] > tr.objective[r - 1]) ++rises;
  }
  auto const pred = gbdt::argmax_rows(gbdt::predict_proba(model, d.x));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == d.y[i];
  auto const acc = static_cast<double>(hit) / static_cast<double>(pred.size());
  return {rises == 0 && tr.objective.size() == 51 && acc >= 0.95,
          fmt("objective %.3f -> %.3f, %zu increases over 50 rounds; train accuracy %.4f (>= 0.95)",
              tr.objective.front(), tr.objective.back(), rises, acc)};
}

verdict cpl() {
  bool ok = true;
  std::vector<std::size_t> s1{3, 1};
  auto const b1 = selftrain::compute_beta(s1, 10);
  ok = ok && b1.warmup && b1.beta == std::vector<double>{0.5, 1.0 / 6.0};
  std::vector<std::size_t> s2{6, 2};
  auto const b2 = selftrain::compute_beta(s2, 10);
  ok = ok && !b2.warmup && b2.beta == std::vector<double>{1.0, 1.0 / 3.0};
  ok = ok && selftrain::flexible_thresholds(b2.beta, 0.9) == std::vector<double>{0.9, 0.3};

  // Constructed probabilities: 3 confident class-0 rows, 1 class-1 row, 6
  // unsure rows (warm-up); then 6/2/2 (standard denominator).
  auto const rows = [](std::size_t a, std::size_t b, std::size_t unsure) {
    matrix p{0, 2};
    for (std::size_t i = 0; i < a; ++i) p.append_row(std::vector<double>{0.95, 0.05});
    for (std::size_t i = 0; i < b; ++i) p.append_row(std::vector<double>{0.03, 0.97});
    for (std::size_t i = 0; i < unsure; ++i) p.append_row(std::vector<double>{0.55, 0.45});
    return p;
  };
  auto const p1 = rows(3, 1, 6);
  auto const p2 = rows(6, 2, 2);
  ok = ok && selftrain::compute_sigma(p1, 0.9) == s1 && selftrain::compute_sigma(p2, 0.9) == s2;
  ok = ok && selftrain::compute_beta(selftrain::compute_sigma(p1, 0.9), 10).warmup;
  ok = ok && !selftrain::compute_beta(selftrain::compute_sigma(p2, 0.9), 10).warmup;

  rng r{3};
  std::size_t labels = 0, violations = 0;
  for (int k = 0; k < 200; ++k) {
    auto const n = 1 + r.below(200);
    auto const C = 2 + r.below(4);
    matrix p{n, C};
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        p(i, c) = std::pow(r.uniform(0.0, 1.0), 4.0);
        t += p(i, c);
      }
      for (std::size_t c = 0; c < C; ++c) p(i, c) /= t;
    }
    auto const sigma = selftrain::compute_sigma(p, 0.9);
    auto const t = selftrain::flexible_thresholds(selftrain::compute_beta(sigma, n).beta, 0.9);
    auto const s = selftrain::pseudo_label(p, t);
    for (std::size_t j = 0; j < s.size(); ++j) {
      ++labels;
      auto const c = static_cast<std::size_t>(s.labels[j]);
      if (!(p(s.rows[j], c) > t[c]) || gbdt::argmax(p.row(s.rows[j])) != s.labels[j]) ++violations;
    }
  }
  return {ok && violations == 0,
          fmt("hand cases %s; warm-up switch %s; %zu/%zu pseudo-labels above threshold", ok ? "exact" : "WRONG",
              ok ? "fires as constructed" : "checked", labels - violations, labels)};
}

verdict self_training() {
  int silhouette_ok = 0;
  int strict = 0;  // seeds where some student was accepted
  double worst_delta = 1.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::config g;
    g.seed = seed;
    g.shift = 0.3;
    auto const dir = work / ("shift_" + std::to_string(seed));
    auto const data = synth::generate(g);
    synth::write_dataset(data, g, dir);
    auto c = load_config(dir / "fixture.cfg");
    c.seed = seed;
    auto const in = pipeline::load_inputs(c);
    auto const card = pipeline::prepare_card(in.rides, c);
    auto const teacher = pipeline::train_stage1(in.survey, in.poi, c).models;
    auto const adapted = pipeline::selftrain_stage1(in.survey, card, in.poi, c);

    auto const final_of = [](std::vector<selftrain::iteration_record> const& log) {
      auto best = log.front();
      for (auto const& rec : log)
        if (rec.accepted) best = rec;
      return best.scores;
    };
    auto const up = [&](std::vector<selftrain::iteration_record> const& log) {
      auto const f = final_of(log);
      return f.degenerate == log.front().scores.degenerate && f.silhouette >= log.front().scores.silhouette;
    };
    if (up(adapted.log_1) && up(adapted.log_2)) ++silhouette_ok;
    auto const accepted = [](std::vector<selftrain::iteration_record> const& log) {
      return std::any_of(log.begin() + 1, log.end(), [](auto const& rec) { return rec.accepted; });
    };
    if (accepted(adapted.log_1) || accepted(adapted.log_2)) ++strict;

    std::map<pipeline::trip_key, purpose> truth;
    for (auto const& t : data.truth) truth[{t.user_id, ingest::format_date(t.service_date), t.trip_seq}] = t.trip_purpose;
    auto const seq = pipeline::trip_sequence(card.trips);
    auto const accuracy = [&](pipeline::purpose_models const& m) {
      auto const a = pipeline::stage1_purpose(card.trips, card.anchors, m, in.poi);
      double hit = 0.0, total = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].source != label_source::model) continue;
        auto const& t = card.trips[i];
        total += 1.0;
        hit += truth.at({t.user_id, ingest::format_date(t.service_date), seq[i]}) == a[i].value;
      }
      return hit / total;
    };
    auto const before = accuracy(teacher);
    auto const after = accuracy(adapted.models);
    worst_delta = std::min(worst_delta, after - before);
    per_seed += fmt(" %+.1f", 100.0 * (after - before));
    fs::remove_all(dir);
  }
  return {silhouette_ok >= 8 && worst_delta >= -0.01,
          fmt("silhouette final >= teacher in %d/10 seeds (>= 8), strictly better in %d; model-labelled "
              "accuracy change pp:%s (worst %+.2f, limit -1)",
              silhouette_ok, strict, per_seed.c_str(), 100.0 * worst_delta)};
}

verdict recovery() {
  auto const c = fixture_config("run_a");
  pipeline::run_all(c);
  auto const e = read_json(c.out / "evaluation.json");
  auto const rule = e["rule_labeled"]["accuracy"].get<double>();
  auto const purpose_acc = e["purpose"]["overall_accuracy"].get<double>();
  auto const job = e["job"]["overall_accuracy"].get<double>();
  auto const age = e["age"]["overall_accuracy"].get<double>();
  auto const income = e["income"]["overall_accuracy"].get<double>();
  return {rule >= 0.95 && purpose_acc >= 0.85 && job >= 0.75 && age >= 0.75,
          fmt("rule Work/Home %.4f (>= 0.95), purpose %.4f (>= 0.85), job %.4f (>= 0.75), age %.4f (>= 0.75), "
              "income %.4f (reported)",
              rule, purpose_acc, job, age, income)};
}

verdict metric_oracles() {
  rng r{6};
  double worst_s = 0.0, worst_db = 0.0;
  std::size_t recall_mismatch = 0;
  for (int k = 0; k < 50; ++k) {
    auto const n = 4 + r.below(197);
    auto const K = 2 + r.below(4);
    auto const F = 1 + r.below(5);
    matrix x{n, F};
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i < K ? i : r.below(K));
      for (std::size_t f = 0; f < F; ++f) x(i, f) = r.normal(static_cast<double>(y[i]), 1.5);
    }
    worst_s = std::max(worst_s, std::abs(metrics::silhouette(x, y, 0) - oracle::silhouette(x, y)));
    worst_db = std::max(worst_db, std::abs(metrics::davies_bouldin(x, y) - oracle::davies_bouldin(x, y)));

    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = r.bernoulli(0.6) ? y[i] : static_cast<int>(r.below(K));
    auto const rep = metrics::evaluate(y, pred, std::vector<std::string>(K, "c"));
    if (rep.weighted_recall != rep.overall_accuracy) ++recall_mismatch;
  }
  return {worst_s <= 1e-12 && worst_db <= 1e-12 && recall_mismatch == 0,
          fmt("max |diff| silhouette %.1e, Davies-Bouldin %.1e (limit 1e-12); weighted recall != accuracy on "
              "%zu/50",
              worst_s, worst_db, recall_mismatch)};
}

verdict tree_shapley() {
  auto const c = fixture_config("run_a");
  auto const in = pipeline::load_inputs(c);
  auto const chains = pipeline::survey_chain_features(in.survey, *in.city, c.max_trips);
  auto const model = gbdt::load(c.out / "socio_model_job.json");
  double worst_local = 0.0;
  for (std::size_t i = 0; i < chains.x.rows(); ++i) {
    auto const row = chains.x.row(i);
    auto const a = explain::shap_values(model, row);
    auto const m = model.margins(row);
    for (std::size_t k = 0; k < model.num_classes; ++k) {
      double total = a.base[k];
      for (std::size_t f = 0; f < model.num_features; ++f) total += a.phi(k, f);
      worst_local = std::max(worst_local, std::abs(total - m[k]));
    }
  }

  rng r{7};
  double worst_brute = 0.0;
  for (int k = 0; k < 20; ++k) {
    auto const F = 2 + r.below(9);
    auto const C = 2 + r.below(3);
    matrix x{120, F};
    std::vector<int> y(120);
    for (std::size_t i = 0; i < 120; ++i) {
      y[i] = static_cast<int>(i < C ? i : r.below(C));
      for (std::size_t f = 0; f < F; ++f) {
        x(i, f) = r.bernoulli(0.1) ? kMissing : r.normal(f % 2 == 0 ? static_cast<double>(y[i]) : 0.0, 1.0);
      }
    }
    gbdt::train_config cfg;
    cfg.rounds = 3;
    cfg.max_depth = 1 + static_cast<int>(r.below(4));
    auto const ens = gbdt::train(x, y, C, cfg);
    for (int j = 0; j < 5; ++j) {
      auto const row = x.row(r.below(120));
      for (auto const& t : ens.trees) {
        std::vector<double> phi(F, 0.0);
        auto const base = explain::tree_shap(t, row, phi);
        auto const want = oracle::brute_shapley(t, row);
        worst_brute = std::max(worst_brute, std::abs(base - want[F]));
        for (std::size_t f = 0; f < F; ++f) worst_brute = std::max(worst_brute, std::abs(phi[f] - want[f]));
      }
    }
  }
  return {worst_local <= 1e-6 && worst_brute <= 1e-6,
          fmt("local accuracy max err %.1e over %zu rows x %zu classes; brute-force max err %.1e (limit 1e-6)",
              worst_local, chains.x.rows(), model.num_classes, worst_brute)};
}

verdict anchor_oracle() {
  rng r{8};
  std::size_t mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<ingest::trip> log;
    auto const days = 1 + static_cast<int>(r.below(10));
    auto const stops = 1 + r.below(5);
    for (int d = 1; d <= days; ++d) {
      auto const n = r.below(4);
      for (std::uint64_t j = 0; j < n; ++j) {
        ingest::ride_record ride;
        ride.user_id = "U";
        ride.service_date = ingest::date{std::chrono::year{2018}, std::chrono::month{10},
                                         std::chrono::day{static_cast<unsigned>(d)}};
        ride.route_id = "R";
        ride.board_time = static_cast<seconds_t>(r.below(24)) * 3600;
        ride.alight_time = ride.board_time + 600;
        ride.board_stop = "S" + std::to_string(r.below(stops));
        ride.alight_stop = "X";
        log.push_back(ingest::trip{"U", ride.service_date, {ride}, std::nullopt, label_source::none});
      }
    }
    anchors::anchor_params const p;
    for (bool const home : {true, false}) {
      auto const want = oracle::detect(log, p, home);
      auto const got = home ? anchors::detect_home(log, p) : anchors::detect_work(log, p);
      if (got.stop != want.stop || got.qualifying_days != want.days ||
          (want.days > 0 && got.frequency != want.frequency)) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("%zu mismatches over 1000 logs x {home, work}", mismatches)};
}

verdict throughput() {
  synth::config g;
  g.survey_users = 10;
  g.card_users = 41000;
  g.card_days = 10;
  auto data = synth::generate(g);
  if (data.rides.size() < 1000000) {
    return {false, fmt("generator produced only %zu rides", data.rides.size())};
  }
  data.rides.resize(1000000);
  std::stringstream poi_csv;
  ingest::write_poi(poi_csv, data.poi);
  auto const poi = ingest::parse_poi(poi_csv);

  auto const pass = [&](unsigned threads, double* seconds) {
    auto const t0 = std::chrono::steady_clock::now();
    auto const trips = ingest::merge_transfers(data.rides, ingest::kDefaultTransferThreshold, threads);
    auto const x = features::trip_feature_matrix(trips, poi, threads);
    *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream out;
    ingest::write_rides(out, ingest::flatten(trips));
    out << trips.size();
    features::write_matrix_binary(out, x);
    return pipeline::sha256_hex(out.str());
  };
  double t4 = 0.0, t1 = 0.0;
  auto const h4 = pass(4, &t4);
  auto const h1 = pass(1, &t1);
  return {t4 < 60.0 && h4 == h1,
          fmt("1,000,000 rides in %.2f s on 4 threads (< 60 s), %.2f s on 1; hashes %s", t4, t1,
              h4 == h1 ? "identical" : "DIFFER")};
}

verdict determinism() {
  auto const a = fixture_config("run_a");
  auto const b = fixture_config("run_b");
  pipeline::run_all(b);
  auto const ma = read_json(a.out / "manifest.json");
  auto const mb = read_json(b.out / "manifest.json");
  std::size_t differ = 0;
  for (auto const& [name, hash] : ma["outputs"].items()) {
    if (!mb["outputs"].contains(name) || mb["outputs"][name] != hash) ++differ;
  }
  auto const same = differ == 0 && ma["outputs"].size() == mb["outputs"].size();
  return {same, fmt("%zu output files compared, %zu differ", ma["outputs"].size(), differ)};
}

}  // namespace

int main(int argc, char** argv) {
  work = fs::absolute(argc > 1 ? fs::path{argv[1]} : fs::path{"acceptance_work"});
  fs::remove_all(work);
  fs::create_directories(work);
  fixture_dir = work / "fixture";
  // Default generator settings: 500 card users over 5 days.
  synth::config const g;
  synth::write_dataset(synth::generate(g), g, fixture_dir);

  struct criterion {
    int id;
    char const* name;
    double limit_s;
    std::function<verdict()> run;
  };
  std::vector<criterion> const all{
      {1, "gradient correctness", 5, gradients},
      {2, "boosting monotonicity", 30, boosting},
      {3, "CPL unit suite", 1, cpl},
      {4, "self-training gain", 300, self_training},
      {5, "end-to-end recovery", 600, recovery},
      {6, "metric oracles", 10, metric_oracles},
      {7, "tree Shapley", 30, tree_shapley},
      {8, "anchor oracle", 5, anchor_oracle},
      {9, "throughput", 60, throughput},
      {10, "determinism", 600, determinism},
  };
  int failed = 0;
  for (auto const& c : all) {
    auto const t0 = std::chrono::steady_clock::now();
    verdict v;
    try {
      v = c.run();
    } catch (std::exception const& e) {
      v = {false, std::string{"exception: "} + e.what()};
    }
    auto const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto const in_time = secs < c.limit_s;
    auto const pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << "AC" << c.id << (c.id < 10 ? "  " : " ") << (pass ? "PASS" : "FAIL") << "  " << c.name << ": "
              << v.detail << fmt(" [%.2f s, limit %.0f s]", secs, c.limit_s) << std::endl;
  }
  std::cout << (all.size() - static_cast<std::size_t>(failed)) << "/" << all.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

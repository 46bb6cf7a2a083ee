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

#include "tripinfer/pipeline.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <openssl/evp.h>

#include "tripinfer/csv.h"
#include "tripinfer/metrics.h"
#include "tripinfer/parallel.h"
#include "tripinfer/synth.h"

namespace tripinfer::pipeline {

namespace {

template <typename Fn>
auto stage(char const* name, Fn&& fn) -> decltype(fn()) {
  auto const prefix = std::string{name} + ": ";
  try {
    return fn();
  } catch (data_error const& e) {
    throw data_error(prefix + e.what());
  } catch (usage_error const& e) {
    throw usage_error(prefix + e.what());
  } catch (std::exception const& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

std::ifstream open_input(std::filesystem::path const& path, char const* what) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw data_error(std::string{"cannot open "} + what + " file " + path.string());
  }
  return in;
}

template <std::size_t N>
std::vector<std::string> names_of(std::array<std::string_view, N> const& a) {
  return {a.begin(), a.end()};
}

std::vector<std::string> trip_feature_names() { return names_of(features::kTripFeatureNames); }

std::vector<std::string> chain_feature_names() {
  auto const& n = features::chain_feature_names();
  return {n.begin(), n.end()};
}

std::vector<std::string> model_2_names() {
  return {std::string{to_string(kModel2Classes[0])}, std::string{to_string(kModel2Classes[1])}};
}

void check_classes(std::span<int const> y, std::size_t num_classes, std::string const& what,
                   std::vector<std::string> const& names) {
  if (y.empty()) {
    throw data_error(what + ": no training rows");
  }
  auto const counts = gbdt::class_counts(y, num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) {
      throw data_error(what + ": class " + names[k] + " absent from training data");
    }
  }
}

struct split_data {
  matrix x_train, x_test;
  std::vector<int> y_train, y_test;
};

split_data split(matrix const& x, std::span<int const> y, std::size_t num_classes,
                 run_config const& c) {
  auto const s = gbdt::stratified_split(y, num_classes, c.validation_fraction, c.seed);
  split_data d{select_rows(x, s.train), select_rows(x, s.validation), {}, {}};
  for (auto const i : s.train) {
    d.y_train.push_back(y[i]);
  }
  for (auto const i : s.validation) {
    d.y_test.push_back(y[i]);
  }
  return d;
}

gbdt::train_config select_config(matrix const& x, std::span<int const> y, std::size_t num_classes,
                                 run_config const& c) {
  auto const grid = c.train_grid();
  if (grid.size() == 1) {
    return grid.front();
  }
  return gbdt::grid_search(x, y, num_classes, grid, c.validation_fraction, gbdt::accuracy_metric,
                           c.seed, c.thread_count())
      .best;
}

void name_model(gbdt::tree_ensemble& m, std::vector<std::string> classes,
                std::vector<std::string> features) {
  m.class_names = std::move(classes);
  m.feature_names = std::move(features);
}

struct fitted {
  gbdt::tree_ensemble model;
  nlohmann::json report;
};

fitted fit(matrix const& x, std::span<int const> y, std::vector<std::string> const& classes,
           std::vector<std::string> const& feature_names, std::string const& what,
           run_config const& c) {
  auto const n_classes = classes.size();
  check_classes(y, n_classes, what, classes);
  auto const d = split(x, y, n_classes, c);
  auto const cfg = select_config(d.x_train, d.y_train, n_classes, c);
  fitted f;
  f.model = gbdt::train(d.x_train, d.y_train, n_classes, cfg, c.thread_count());
  name_model(f.model, classes, feature_names);
  auto const predicted = gbdt::argmax_rows(gbdt::predict_proba(f.model, d.x_test, c.thread_count()));
  f.report = nlohmann::json::parse(metrics::report_json(metrics::evaluate(d.y_test, predicted, classes)));
  f.report["train_rows"] = d.y_train.size();
  f.report["test_rows"] = d.y_test.size();
  f.report["eta"] = cfg.eta;
  f.report["max_depth"] = cfg.max_depth;
  f.report["rounds"] = cfg.rounds;
  return f;
}

selftrain::result adapt(matrix const& x, std::span<int const> y, matrix const& unlabeled,
                        std::vector<std::string> const& classes,
                        std::vector<std::string> const& feature_names, std::string const& what,
                        run_config const& c) {
  check_classes(y, classes.size(), what, classes);
  auto const d = split(x, y, classes.size(), c);
  auto const cfg = select_config(d.x_train, d.y_train, classes.size(), c);
  auto r = selftrain::teacher_student_loop(d.x_train, d.y_train, unlabeled, classes.size(), cfg,
                                           c.selftrain_config(), c.thread_count());
  name_model(r.model, classes, feature_names);
  name_model(r.teacher, classes, feature_names);
  return r;
}

std::unordered_map<std::string_view, anchors::anchor_result const*> anchor_index(
    std::span<anchors::anchor_result const> anchors) {
  std::unordered_map<std::string_view, anchors::anchor_result const*> idx;
  for (auto const& a : anchors) {
    idx.emplace(a.user_id, &a);
  }
  return idx;
}

// [begin, end) ranges of consecutive trips sharing (user, date).
std::vector<std::pair<std::size_t, std::size_t>> day_groups(std::span<ingest::trip const> trips) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= trips.size(); ++i) {
    if (i == trips.size() || trips[i].user_id != trips[begin].user_id ||
        trips[i].service_date != trips[begin].service_date) {
      if (i > begin) {
        groups.emplace_back(begin, i);
      }
      begin = i;
    }
  }
  return groups;
}

std::string to_string_fixed(std::size_t v) { return std::to_string(v); }

}  // namespace

// ---------------------------------------------------------------------------

inputs load_inputs(run_config const& c) {
  return stage("ingest", [&] {
    inputs in;
    {
      auto f = open_input(c.survey, "survey");
      in.survey = ingest::parse_survey(f, c.delimiter);
    }
    {
      auto f = open_input(c.rides, "rides");
      ingest::parse_options opts;
      opts.delimiter = c.delimiter;
      opts.bounds = c.box;
      auto r = ingest::parse_rides(f, opts);
      in.rides = std::move(r.records);
      in.rejections = std::move(r.rejections);
      ingest::sort_rides(in.rides);
    }
    {
      auto f = open_input(c.poi, "POI");
      in.poi = ingest::parse_poi(f, c.delimiter);
    }
    auto const spec = ingest::grid_spec::from_bbox(c.box, c.cell_km);
    auto pf = open_input(c.population, "population raster");
    auto lf = open_input(c.land_price, "land price raster");
    in.city.emplace(ingest::load_grid(spec, ingest::parse_raster(pf, c.delimiter),
                                      ingest::parse_raster(lf, c.delimiter)));
    return in;
  });
}

card_data prepare_card(std::span<ingest::ride_record const> rides, run_config const& c) {
  card_data d;
  d.trips = stage("ingest", [&] { return ingest::merge_transfers(rides, c.transfer, c.thread_count()); });
  d.anchors = stage("anchors", [&] { return anchors::detect_all(d.trips, c.anchor, c.thread_count()); });
  return d;
}

// ---------------------------------------------------------------------------
// Stage 1

labeled_trips model_1_data(std::span<ingest::survey_person const> survey, ingest::poi_table const& poi) {
  std::vector<ingest::trip> trips;
  labeled_trips d;
  for (auto const& p : survey) {
    for (auto& t : ingest::to_trips(p)) {
      d.y.push_back(static_cast<int>(*t.trip_purpose));
      trips.push_back(std::move(t));
    }
  }
  d.x = features::trip_feature_matrix(trips, poi);
  return d;
}

labeled_trips model_2_data(std::span<ingest::survey_person const> survey, ingest::poi_table const& poi) {
  std::vector<ingest::trip> trips;
  labeled_trips d;
  for (auto const& p : survey) {
    for (auto& t : ingest::to_trips(p)) {
      auto const it = std::find(begin(kModel2Classes), end(kModel2Classes), *t.trip_purpose);
      if (it != end(kModel2Classes)) {
        d.y.push_back(static_cast<int>(it - begin(kModel2Classes)));
        trips.push_back(std::move(t));
      }
    }
  }
  d.x = features::trip_feature_matrix(trips, poi);
  return d;
}

training_result train_stage1(std::span<ingest::survey_person const> survey,
                             ingest::poi_table const& poi, run_config const& c) {
  return stage("train-purpose", [&] {
    if (survey.empty()) {
      throw data_error("survey is empty");
    }
    auto const d1 = model_1_data(survey, poi);
    auto const d2 = model_2_data(survey, poi);
    auto f1 = fit(d1.x, d1.y, names_of(kPurposeNames), trip_feature_names(), "model I", c);
    auto f2 = fit(d2.x, d2.y, model_2_names(), trip_feature_names(), "model II", c);
    training_result r;
    r.models = {std::move(f1.model), std::move(f2.model)};
    r.report = {{"model_1", std::move(f1.report)}, {"model_2", std::move(f2.report)}};
    return r;
  });
}

std::vector<purpose_assignment> stage1_purpose(std::span<ingest::trip const> trips,
                                               std::span<anchors::anchor_result const> anchors,
                                               purpose_models const& models,
                                               ingest::poi_table const& poi, unsigned threads) {
  if (models.model_1.num_classes != kNumPurposes || models.model_2.num_classes != kModel2Classes.size() ||
      models.model_1.num_features != features::kTripFeatureCount ||
      models.model_2.num_features != features::kTripFeatureCount) {
    throw data_error("purpose models are untrained or have the wrong shape");
  }
  auto const idx = anchor_index(anchors);
  auto const x = features::trip_feature_matrix(trips, poi, threads);
  std::vector<purpose_assignment> out(trips.size());
  parallel_for(trips.size(), threads, [&](std::size_t i) {
    auto const& t = trips[i];
    auto const it = idx.find(t.user_id);
    if (it != end(idx) && it->second->anchored()) {
      if (auto const rule = anchors::rule_label(t, *it->second)) {
        out[i] = {*rule, label_source::rule, 1.0};
        return;
      }
      auto const p = models.model_2.predict_proba(x.row(i));
      auto const k = gbdt::argmax(p);
      out[i] = {kModel2Classes[static_cast<std::size_t>(k)], label_source::model, p[static_cast<std::size_t>(k)]};
      return;
    }
    auto const p = models.model_1.predict_proba(x.row(i));
    auto const k = gbdt::argmax(p);
    out[i] = {static_cast<purpose>(k), label_source::model, p[static_cast<std::size_t>(k)]};
  });
  return out;
}

selftrain_outcome selftrain_stage1(std::span<ingest::survey_person const> survey, card_data const& card,
                                   ingest::poi_table const& poi, run_config const& c) {
  return stage("selftrain-purpose", [&] {
    if (survey.empty()) {
      throw data_error("survey is empty");
    }
    auto const idx = anchor_index(card.anchors);
    std::vector<ingest::trip> free_trips;
    std::vector<ingest::trip> anchored_rest;
    for (auto const& t : card.trips) {
      auto const it = idx.find(t.user_id);
      if (it != end(idx) && it->second->anchored()) {
        if (!anchors::rule_label(t, *it->second)) {
          anchored_rest.push_back(t);
        }
      } else {
        free_trips.push_back(t);
      }
    }
    auto const threads = c.thread_count();
    auto const u1 = features::trip_feature_matrix(free_trips, poi, threads);
    auto const u2 = features::trip_feature_matrix(anchored_rest, poi, threads);
    auto const d1 = model_1_data(survey, poi);
    auto const d2 = model_2_data(survey, poi);
    auto r1 = adapt(d1.x, d1.y, u1, names_of(kPurposeNames), trip_feature_names(), "model I", c);
    auto r2 = adapt(d2.x, d2.y, u2, model_2_names(), trip_feature_names(), "model II", c);
    selftrain_outcome o;
    o.models = {std::move(r1.model), std::move(r2.model)};
    o.log_1 = std::move(r1.log);
    o.log_2 = std::move(r2.log);
    return o;
  });
}

std::vector<int> trip_sequence(std::span<ingest::trip const> trips) {
  std::vector<int> seq(trips.size());
  for (auto const& [b, e] : day_groups(trips)) {
    for (auto i = b; i < e; ++i) {
      seq[i] = static_cast<int>(i - b + 1);
    }
  }
  return seq;
}

void write_purposes(std::ostream& out, std::span<ingest::trip const> trips,
                    std::span<purpose_assignment const> assignments) {
  csv::write_row(out, {"user_id", "date", "trip_seq", "purpose", "label_source", "confidence"});
  auto const seq = trip_sequence(trips);
  for (std::size_t i = 0; i < trips.size(); ++i) {
    auto const& a = assignments[i];
    csv::write_row(out, {trips[i].user_id, ingest::format_date(trips[i].service_date),
                         std::to_string(seq[i]), std::string{to_string(a.value)},
                         std::string{to_string(a.source)}, csv::format_double(a.confidence)});
  }
}

std::map<trip_key, purpose_assignment> parse_purposes(std::istream& in) {
  if (!in) {
    throw data_error("purposes: unreadable source");
  }
  csv::reader reader{in};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("purposes: missing header");
  }
  csv::header const hdr{row};
  auto const c_user = hdr.require("user_id");
  auto const c_date = hdr.require("date");
  auto const c_seq = hdr.require("trip_seq");
  auto const c_purpose = hdr.require("purpose");
  auto const c_source = hdr.require("label_source");
  auto const c_conf = hdr.require("confidence");
  std::map<trip_key, purpose_assignment> out;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) {
      continue;
    }
    auto const where = "purposes row " + std::to_string(reader.record_number());
    if (row.size() != hdr.names().size()) {
      throw data_error(where + ": wrong field count");
    }
    auto const seq = csv::parse_int(row[c_seq]);
    auto const conf = csv::parse_double(row[c_conf]);
    if (!seq || !conf) {
      throw data_error(where + ": malformed number");
    }
    purpose_assignment a{parse_enum_or_throw<purpose>(row[c_purpose], kPurposeNames, "purpose"),
                         parse_enum_or_throw<label_source>(row[c_source], kLabelSourceNames, "label source"),
                         *conf};
    if (!out.emplace(trip_key{row[c_user], row[c_date], static_cast<int>(*seq)}, a).second) {
      throw data_error(where + ": duplicate trip");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage 2

std::size_t class_count(attribute a) {
  switch (a) {
    case attribute::age: return kAgeNames.size();
    case attribute::job: return kJobNames.size();
    case attribute::income: return kIncomeNames.size();
  }
  return 0;
}

std::vector<std::string> class_names(attribute a) {
  switch (a) {
    case attribute::age: return names_of(kAgeNames);
    case attribute::job: return names_of(kJobNames);
    case attribute::income: return names_of(kIncomeNames);
  }
  return {};
}

gbdt::tree_ensemble& socio_models::at(attribute a) {
  return a == attribute::age ? age : a == attribute::job ? job : income;
}

gbdt::tree_ensemble const& socio_models::at(attribute a) const {
  return a == attribute::age ? age : a == attribute::job ? job : income;
}

std::vector<int> const& survey_chains::labels(attribute a) const {
  return a == attribute::age ? age : a == attribute::job ? job : income;
}

survey_chains survey_chain_features(std::span<ingest::survey_person const> survey,
                                    ingest::grid const& city, std::size_t max_trips) {
  survey_chains s;
  s.x = matrix{0, features::kChainFeatureCount};
  for (auto const& p : survey) {
    auto const trips = ingest::to_trips(p);
    std::vector<purpose> purposes;
    for (auto const& t : trips) {
      purposes.push_back(*t.trip_purpose);
    }
    auto const f = features::chain_feature_vector(trips, {p.home, p.work}, city, purposes, max_trips);
    s.x.append_row(f);
    s.age.push_back(static_cast<int>(p.age));
    s.job.push_back(static_cast<int>(p.job));
    s.income.push_back(static_cast<int>(p.income));
  }
  return s;
}

card_chains card_chain_features(card_data const& card, std::span<purpose_assignment const> assignments,
                                ingest::grid const& city, std::size_t max_trips, unsigned threads) {
  if (assignments.size() != card.trips.size()) {
    throw std::invalid_argument("card_chain_features: assignments not aligned with trips");
  }
  std::unordered_map<std::string_view, ingest::location> stops;
  for (auto const& t : card.trips) {
    for (auto const& l : t.legs) {
      stops.try_emplace(l.board_stop, ingest::location{l.board_stop, l.board_lon, l.board_lat});
      stops.try_emplace(l.alight_stop, ingest::location{l.alight_stop, l.alight_lon, l.alight_lat});
    }
  }
  auto const idx = anchor_index(card.anchors);
  auto const groups = day_groups(card.trips);
  card_chains out;
  out.x = matrix{groups.size(), features::kChainFeatureCount};
  out.user_id.resize(groups.size());
  out.service_date.resize(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t g) {
    auto const [b, e] = groups[g];
    auto const chain = std::span<ingest::trip const>{card.trips}.subspan(b, e - b);
    std::vector<purpose> purposes;
    for (auto i = b; i < e; ++i) {
      purposes.push_back(assignments[i].value);
    }
    features::anchor_points pts;
    if (auto const it = idx.find(chain.front().user_id); it != end(idx)) {
      if (it->second->home_stop) {
        pts.home = stops.at(*it->second->home_stop);
      }
      if (it->second->work_stop) {
        pts.work = stops.at(*it->second->work_stop);
      }
    }
    auto const f = features::chain_feature_vector(chain, pts, city, purposes, max_trips);
    std::copy(begin(f), end(f), out.x.row(g).begin());
    out.user_id[g] = chain.front().user_id;
    out.service_date[g] = chain.front().service_date;
  });
  return out;
}

socio_training train_stage2(survey_chains const& chains, run_config const& c) {
  return stage("train-socio", [&] {
    socio_training r;
    for (auto const a : kAttributes) {
      auto const name = std::string{kAttributeNames[static_cast<std::size_t>(a)]};
      auto f = fit(chains.x, chains.labels(a), class_names(a), chain_feature_names(), name + " model", c);
      r.models.at(a) = std::move(f.model);
      r.report[name] = std::move(f.report);
    }
    return r;
  });
}

socio_selftrain selftrain_stage2(survey_chains const& labeled, card_chains const& unlabeled,
                                 run_config const& c) {
  return stage("selftrain-socio", [&] {
    socio_selftrain r;
    for (auto const a : kAttributes) {
      auto const name = std::string{kAttributeNames[static_cast<std::size_t>(a)]};
      auto s = adapt(labeled.x, labeled.labels(a), unlabeled.x, class_names(a), chain_feature_names(),
                     name + " model", c);
      r.models.at(a) = std::move(s.model);
      r.logs[a] = std::move(s.log);
    }
    return r;
  });
}

std::map<attribute, matrix> stage2_socio(card_chains const& chains, socio_models const& models,
                                         unsigned threads) {
  std::map<attribute, matrix> out;
  for (auto const a : kAttributes) {
    auto const& m = models.at(a);
    if (m.num_classes != class_count(a) || m.num_features != features::kChainFeatureCount) {
      throw data_error(std::string{kAttributeNames[static_cast<std::size_t>(a)]} +
                       " model is untrained or has the wrong shape");
    }
    out[a] = gbdt::predict_proba(m, chains.x, threads);
  }
  return out;
}

int majority_vote(matrix const& day_probabilities) {
  if (day_probabilities.rows() == 0 || day_probabilities.cols() == 0) {
    throw data_error("majority_vote: no days");
  }
  auto const c = day_probabilities.cols();
  std::vector<std::size_t> count(c, 0);
  std::vector<double> mean(c, 0.0);
  for (std::size_t i = 0; i < day_probabilities.rows(); ++i) {
    auto const row = day_probabilities.row(i);
    ++count[static_cast<std::size_t>(gbdt::argmax(row))];
    for (std::size_t k = 0; k < c; ++k) {
      mean[k] += row[k];
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < c; ++k) {
    if (count[k] > count[best] || (count[k] == count[best] && mean[k] > mean[best])) {
      best = k;
    }
  }
  return static_cast<int>(best);
}

std::vector<profile> vote_profiles(card_chains const& chains,
                                   std::map<attribute, matrix> const& day_probabilities) {
  std::vector<profile> out;
  std::size_t b = 0;
  auto const n = chains.user_id.size();
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && chains.user_id[i] == chains.user_id[b]) {
      continue;
    }
    std::vector<std::size_t> rows(i - b);
    std::iota(begin(rows), end(rows), b);
    auto const vote = [&](attribute a) {
      return majority_vote(select_rows(day_probabilities.at(a), rows));
    };
    out.push_back(profile{chains.user_id[b], static_cast<age_band>(vote(attribute::age)),
                          static_cast<job_status>(vote(attribute::job)),
                          static_cast<income_band>(vote(attribute::income)), i - b});
    b = i;
  }
  return out;
}

void write_day_predictions(std::ostream& out, card_chains const& chains,
                           std::map<attribute, matrix> const& day_probabilities) {
  csv::write_row(out, {"user_id", "date", "attribute", "class", "probability"});
  for (std::size_t i = 0; i < chains.user_id.size(); ++i) {
    auto const date = ingest::format_date(chains.service_date[i]);
    for (auto const a : kAttributes) {
      auto const names = class_names(a);
      auto const row = day_probabilities.at(a).row(i);
      for (std::size_t k = 0; k < names.size(); ++k) {
        csv::write_row(out, {chains.user_id[i], date, std::string{kAttributeNames[static_cast<std::size_t>(a)]},
                             names[k], csv::format_double(row[k])});
      }
    }
  }
}

day_predictions parse_day_predictions(std::istream& in) {
  if (!in) {
    throw data_error("day predictions: unreadable source");
  }
  csv::reader reader{in};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("day predictions: missing header");
  }
  csv::header const hdr{row};
  auto const c_user = hdr.require("user_id");
  auto const c_date = hdr.require("date");
  auto const c_attr = hdr.require("attribute");
  auto const c_class = hdr.require("class");
  auto const c_prob = hdr.require("probability");
  day_predictions d;
  std::map<attribute, std::vector<double>> values;
  std::map<std::pair<std::string, std::string>, std::size_t> day_index;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) {
      continue;
    }
    auto const where = "day predictions row " + std::to_string(reader.record_number());
    if (row.size() != hdr.names().size()) {
      throw data_error(where + ": wrong field count");
    }
    auto const a = parse_enum_or_throw<attribute>(row[c_attr], kAttributeNames, "attribute");
    auto const names = class_names(a);
    auto const k = std::find(begin(names), end(names), row[c_class]) - begin(names);
    auto const p = csv::parse_double(row[c_prob]);
    auto const date = ingest::parse_date(row[c_date]);
    if (static_cast<std::size_t>(k) == names.size() || !p || !date) {
      throw data_error(where + ": malformed class, probability or date");
    }
    auto const [it, inserted] = day_index.try_emplace({row[c_user], row[c_date]}, d.chains.user_id.size());
    if (inserted) {
      d.chains.user_id.push_back(row[c_user]);
      d.chains.service_date.push_back(*date);
    }
    auto& v = values[a];
    v.resize(d.chains.user_id.size() * names.size(), 0.0);
    v[it->second * names.size() + static_cast<std::size_t>(k)] = *p;
  }
  for (auto const a : kAttributes) {
    auto& v = values[a];
    v.resize(d.chains.user_id.size() * class_count(a), 0.0);
    d.probabilities[a] = matrix{d.chains.user_id.size(), class_count(a), std::move(v)};
  }
  return d;
}

void write_profiles(std::ostream& out, std::span<profile const> profiles) {
  csv::write_row(out, {"user_id", "age_band", "job_status", "income_band", "days_observed"});
  for (auto const& p : profiles) {
    csv::write_row(out, {p.user_id, std::string{to_string(p.age)}, std::string{to_string(p.job)},
                         std::string{to_string(p.income)}, to_string_fixed(p.days_observed)});
  }
}

std::vector<profile> parse_profiles(std::istream& in) {
  if (!in) {
    throw data_error("profiles: unreadable source");
  }
  csv::reader reader{in};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("profiles: missing header");
  }
  csv::header const hdr{row};
  auto const c_user = hdr.require("user_id");
  auto const c_age = hdr.require("age_band");
  auto const c_job = hdr.require("job_status");
  auto const c_income = hdr.require("income_band");
  auto const c_days = hdr.require("days_observed");
  std::vector<profile> out;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) {
      continue;
    }
    if (row.size() != hdr.names().size()) {
      throw data_error("profiles row " + std::to_string(reader.record_number()) + ": wrong field count");
    }
    auto const days = csv::parse_int(row[c_days]);
    if (!days || *days < 1) {
      throw data_error("profiles row " + std::to_string(reader.record_number()) + ": bad days_observed");
    }
    out.push_back(profile{row[c_user], parse_enum_or_throw<age_band>(row[c_age], kAgeNames, "age band"),
                          parse_enum_or_throw<job_status>(row[c_job], kJobNames, "job status"),
                          parse_enum_or_throw<income_band>(row[c_income], kIncomeNames, "income band"),
                          static_cast<std::size_t>(*days)});
  }
  return out;
}

nlohmann::json evaluate_run(synth::truth_table const& truth,
                            std::map<trip_key, purpose_assignment> const& purposes,
                            std::span<profile const> profiles) {
  synth::predictions p;
  std::size_t rule_total = 0, rule_hits = 0, model_total = 0, model_hits = 0;
  for (auto const& [key, a] : purposes) {
    p.trips.emplace(key, a.value);
    auto const it = truth.trips.find(key);
    if (it == end(truth.trips)) {
      continue;  // reported by holdout_truth below
    }
    auto const hit = it->second == a.value ? 1U : 0U;
    if (a.source == label_source::rule) {
      ++rule_total;
      rule_hits += hit;
    } else {
      ++model_total;
      model_hits += hit;
    }
  }
  for (auto const& pr : profiles) {
    p.profiles.emplace(pr.user_id, std::tuple{pr.age, pr.job, pr.income});
  }
  auto const r = synth::holdout_truth(truth, p);
  auto const ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? nlohmann::json(nullptr) : nlohmann::json(static_cast<double>(a) / static_cast<double>(b));
  };
  nlohmann::json j;
  if (!p.trips.empty()) {
    j["purpose"] = nlohmann::json::parse(metrics::report_json(r.purpose));
    j["rule_labeled"] = {{"trips", rule_total}, {"accuracy", ratio(rule_hits, rule_total)}};
    j["model_labeled"] = {{"trips", model_total}, {"accuracy", ratio(model_hits, model_total)}};
  }
  if (!p.profiles.empty()) {
    j["age"] = nlohmann::json::parse(metrics::report_json(r.age));
    j["job"] = nlohmann::json::parse(metrics::report_json(r.job));
    j["income"] = nlohmann::json::parse(metrics::report_json(r.income));
  }
  return j;
}

// ---------------------------------------------------------------------------

void write_file_atomic(std::filesystem::path const& path, std::string const& content) {
  write_file_atomic(path, [&](std::ostream& out) { out << content; });
}

void write_file_atomic(std::filesystem::path const& path,
                       std::function<void(std::ostream&)> const& writer) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
    if (!out) {
      throw data_error("cannot write " + tmp.string());
    }
    writer(out);
    out.flush();
    if (!out) {
      throw data_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

namespace {

class sha256 {
 public:
  sha256() : ctx_{EVP_MD_CTX_new(), &EVP_MD_CTX_free} {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: digest unavailable");
    }
  }
  void update(char const* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(std::filesystem::path const& path) {
  auto in = open_input(path, "hashed");
  sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  return h.hex();
}

std::string sha256_hex(std::string_view data) {
  sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

run_summary run_all(run_config const& c) {
  c.validate();
  std::filesystem::create_directories(c.out);
  auto const threads = c.thread_count();
  run_summary summary;

  auto const timed = [&](char const* name, auto&& fn) {
    auto const t0 = std::chrono::steady_clock::now();
    auto result = fn();
    summary.timings_ms[name] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
  };
  auto const emit = [&](std::string const& name, std::function<void(std::ostream&)> const& writer) {
    write_file_atomic(c.out / name, writer);
    summary.outputs.push_back(name);
  };
  auto const emit_model = [&](std::string const& name, gbdt::tree_ensemble const& m) {
    emit(name, [&](std::ostream& out) { out << gbdt::to_json(m) << '\n'; });
  };
  auto const emit_log = [&](std::string const& name, std::vector<selftrain::iteration_record> const& log,
                            gbdt::tree_ensemble const& m) {
    emit(name, [&](std::ostream& out) { selftrain::write_log(out, log, m.class_names); });
  };

  auto const in = timed("ingest", [&] { return load_inputs(c); });
  emit("rejections.csv", [&](std::ostream& out) { ingest::write_rejections(out, in.rejections); });

  auto const card = timed("anchors", [&] { return prepare_card(in.rides, c); });
  emit("anchors.csv", [&](std::ostream& out) { anchors::write_anchors(out, card.anchors); });

  auto const stage1 = timed("train-purpose", [&] { return train_stage1(in.survey, in.poi, c); });
  emit("stage1_report.json", [&](std::ostream& out) { out << stage1.report.dump(2) << '\n'; });

  auto const adapted = timed("selftrain-purpose", [&] { return selftrain_stage1(in.survey, card, in.poi, c); });
  emit_model("purpose_model_1.json", adapted.models.model_1);
  emit_model("purpose_model_2.json", adapted.models.model_2);
  emit_log("selftrain_purpose_1.csv", adapted.log_1, adapted.models.model_1);
  emit_log("selftrain_purpose_2.csv", adapted.log_2, adapted.models.model_2);

  auto const assignments = timed("infer-purpose", [&] {
    return stage("infer-purpose", [&] {
      return stage1_purpose(card.trips, card.anchors, adapted.models, in.poi, threads);
    });
  });
  emit("purposes.csv", [&](std::ostream& out) { write_purposes(out, card.trips, assignments); });

  auto const survey_x = timed("chain-features", [&] {
    return stage("chain-features", [&] { return survey_chain_features(in.survey, *in.city, c.max_trips); });
  });
  auto const card_x = timed("chain-features-card", [&] {
    return stage("chain-features", [&] {
      return card_chain_features(card, assignments, *in.city, c.max_trips, threads);
    });
  });

  auto const stage2 = timed("train-socio", [&] { return train_stage2(survey_x, c); });
  emit("stage2_report.json", [&](std::ostream& out) { out << stage2.report.dump(2) << '\n'; });

  auto const socio = timed("selftrain-socio", [&] { return selftrain_stage2(survey_x, card_x, c); });
  for (auto const a : kAttributes) {
    auto const name = std::string{kAttributeNames[static_cast<std::size_t>(a)]};
    emit_model("socio_model_" + name + ".json", socio.models.at(a));
    emit_log("selftrain_" + name + ".csv", socio.logs.at(a), socio.models.at(a));
  }

  auto const probs = timed("infer-socio", [&] {
    return stage("infer-socio", [&] { return stage2_socio(card_x, socio.models, threads); });
  });
  emit("day_predictions.csv", [&](std::ostream& out) { write_day_predictions(out, card_x, probs); });

  auto const profiles = timed("vote", [&] { return stage("vote", [&] { return vote_profiles(card_x, probs); }); });
  emit("profiles.csv", [&](std::ostream& out) { write_profiles(out, profiles); });

  if (std::filesystem::exists(c.truth)) {
    auto const report = timed("evaluate", [&] {
      return stage("evaluate", [&] {
        auto f = open_input(c.truth, "truth");
        auto const truth = synth::parse_truth(f);
        std::map<trip_key, purpose_assignment> keyed;
        auto const seq = trip_sequence(card.trips);
        for (std::size_t i = 0; i < card.trips.size(); ++i) {
          keyed.emplace(trip_key{card.trips[i].user_id, ingest::format_date(card.trips[i].service_date), seq[i]},
                        assignments[i]);
        }
        return evaluate_run(truth, keyed, profiles);
      });
    });
    emit("evaluation.json", [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  }

  nlohmann::json manifest;
  manifest["tool"] = "tripinfer";
  manifest["version"] = "1.0.0";
  manifest["seed"] = c.seed;
  manifest["threads"] = threads;
  manifest["config"] = to_ini(c);
  std::array<std::pair<char const*, std::filesystem::path>, 5> const inputs_used{
      {{"survey", c.survey}, {"rides", c.rides}, {"poi", c.poi}, {"population", c.population},
       {"land_price", c.land_price}}};
  for (auto const& [name, path] : inputs_used) {
    manifest["inputs"][name] = {{"path", path.generic_string()}, {"sha256", sha256_file(path)}};
  }
  for (auto const& name : summary.outputs) {
    manifest["outputs"][name] = sha256_file(c.out / name);
  }
  manifest["timings_ms"] = summary.timings_ms;
  write_file_atomic(c.out / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

}  // namespace tripinfer::pipeline

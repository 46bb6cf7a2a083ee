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

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "nlohmann/json.hpp"

#include "tripinfer/anchors.h"
#include "tripinfer/config.h"
#include "tripinfer/features.h"
#include "tripinfer/gbdt.h"
#include "tripinfer/ingest.h"
#include "tripinfer/matrix.h"
#include "tripinfer/selftrain.h"

namespace tripinfer::pipeline {

// ---------------------------------------------------------------------------
// Inputs

struct inputs {
  std::vector<ingest::survey_person> survey;
  std::vector<ingest::ride_record> rides;  // accepted rows, canonical order
  std::vector<ingest::rejection> rejections;
  ingest::poi_table poi;
  std::optional<ingest::grid> city;
};

// Reads every input named by the config. Errors carry the stage prefix
// "ingest: ".
inputs load_inputs(run_config const& c);

struct card_data {
  std::vector<ingest::trip> trips;  // (user, date, dep_time) order
  std::vector<anchors::anchor_result> anchors;  // user order
};

card_data prepare_card(std::span<ingest::ride_record const> rides, run_config const& c);

// ---------------------------------------------------------------------------
// Stage 1: trip purposes

// Model I predicts all four purposes; Model II only the remaining purposes
// of anchored users.
constexpr std::array<purpose, 2> kModel2Classes{purpose::shopping_entertainment, purpose::medical};

struct purpose_models {
  gbdt::tree_ensemble model_1;
  gbdt::tree_ensemble model_2;
};

struct labeled_trips {
  matrix x;
  std::vector<int> y;
};

// Model I data: every survey trip. Model II data: survey trips whose purpose
// is not Work or Home, labelled by index into kModel2Classes.
labeled_trips model_1_data(std::span<ingest::survey_person const> survey, ingest::poi_table const& poi);
labeled_trips model_2_data(std::span<ingest::survey_person const> survey, ingest::poi_table const& poi);

struct training_result {
  purpose_models models;
  nlohmann::json report;  // held-out split metrics per model
};

// Each model is fitted on a stratified 80% split (after optional grid
// search) and scored on the remaining 20%. Throws data_error on an empty
// survey or a class without trips.
training_result train_stage1(std::span<ingest::survey_person const> survey,
                             ingest::poi_table const& poi, run_config const& c);

struct purpose_assignment {
  purpose value{};
  label_source source{label_source::none};
  double confidence{};
};

// Rule labels for anchored users, Model II for their other trips, Model I for
// everyone else. Result is aligned with `trips`.
std::vector<purpose_assignment> stage1_purpose(std::span<ingest::trip const> trips,
                                               std::span<anchors::anchor_result const> anchors,
                                               purpose_models const& models,
                                               ingest::poi_table const& poi, unsigned threads = 1);

struct selftrain_outcome {
  purpose_models models;
  std::vector<selftrain::iteration_record> log_1;
  std::vector<selftrain::iteration_record> log_2;
};

// Model I adapts to trips of non-anchored card users, Model II to the
// non-rule trips of anchored users.
selftrain_outcome selftrain_stage1(std::span<ingest::survey_person const> survey, card_data const& card,
                                   ingest::poi_table const& poi, run_config const& c);

// purposes.csv: user_id,date,trip_seq,purpose,label_source,confidence
void write_purposes(std::ostream& out, std::span<ingest::trip const> trips,
                    std::span<purpose_assignment const> assignments);

using trip_key = std::tuple<std::string, std::string, int>;  // user, date, seq
std::map<trip_key, purpose_assignment> parse_purposes(std::istream& in);

// 1-based position of each trip within its (user, date).
std::vector<int> trip_sequence(std::span<ingest::trip const> trips);

// ---------------------------------------------------------------------------
// Stage 2: socio-economic attributes

enum class attribute { age, job, income };
constexpr std::array<attribute, 3> kAttributes{attribute::age, attribute::job, attribute::income};
constexpr std::array<std::string_view, 3> kAttributeNames{"age", "job", "income"};

std::size_t class_count(attribute a);
std::vector<std::string> class_names(attribute a);

struct socio_models {
  gbdt::tree_ensemble age;
  gbdt::tree_ensemble job;
  gbdt::tree_ensemble income;

  gbdt::tree_ensemble& at(attribute a);
  gbdt::tree_ensemble const& at(attribute a) const;
};

struct survey_chains {
  matrix x;
  std::vector<int> age, job, income;

  std::vector<int> const& labels(attribute a) const;
};

// One day chain per respondent with the surveyed purposes and the reported
// home and work locations.
survey_chains survey_chain_features(std::span<ingest::survey_person const> survey,
                                    ingest::grid const& city, std::size_t max_trips = 5);

struct card_chains {
  matrix x;
  std::vector<std::string> user_id;
  std::vector<ingest::date> service_date;
};

// One row per (user, date) with the inferred purposes; detected anchors give
// the home and work blocks.
card_chains card_chain_features(card_data const& card, std::span<purpose_assignment const> assignments,
                                ingest::grid const& city, std::size_t max_trips = 5,
                                unsigned threads = 1);

struct socio_training {
  socio_models models;
  nlohmann::json report;
};

// Each attribute model is fitted on its own stratified 80% split of the
// survey chains and scored on the rest.
socio_training train_stage2(survey_chains const& chains, run_config const& c);

struct socio_selftrain {
  socio_models models;
  std::map<attribute, std::vector<selftrain::iteration_record>> logs;
};

socio_selftrain selftrain_stage2(survey_chains const& labeled, card_chains const& unlabeled,
                                 run_config const& c);

// Per-day class probabilities of each attribute, rows aligned with the
// chains. Throws data_error on a model of the wrong arity.
std::map<attribute, matrix> stage2_socio(card_chains const& chains, socio_models const& models,
                                         unsigned threads = 1);

// Most frequent per-day argmax; ties go to the higher mean probability over
// the days, then to the lower class index. Throws data_error without days.
int majority_vote(matrix const& day_probabilities);

struct profile {
  std::string user_id;
  age_band age{};
  job_status job{};
  income_band income{};
  std::size_t days_observed{};
};

std::vector<profile> vote_profiles(card_chains const& chains,
                                   std::map<attribute, matrix> const& day_probabilities);

// day_predictions.csv: user_id,date,attribute,class,probability (one row per
// class).
void write_day_predictions(std::ostream& out, card_chains const& chains,
                           std::map<attribute, matrix> const& day_probabilities);
struct day_predictions {
  card_chains chains;  // x left empty
  std::map<attribute, matrix> probabilities;
};
day_predictions parse_day_predictions(std::istream& in);

// profiles.csv: user_id,age_band,job_status,income_band,days_observed
void write_profiles(std::ostream& out, std::span<profile const> profiles);
std::vector<profile> parse_profiles(std::istream& in);

// Scores purposes and profiles against synthetic ground truth; adds the
// accuracy of rule-labelled and model-labelled trips separately.
nlohmann::json evaluate_run(synth::truth_table const& truth,
                            std::map<trip_key, purpose_assignment> const& purposes,
                            std::span<profile const> profiles);

// ---------------------------------------------------------------------------
// Whole run

// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(std::filesystem::path const& path, std::string const& content);
void write_file_atomic(std::filesystem::path const& path,
                       std::function<void(std::ostream&)> const& writer);

std::string sha256_file(std::filesystem::path const& path);
std::string sha256_hex(std::string_view data);

struct run_summary {
  std::vector<std::string> outputs;  // file names inside the output directory
  std::map<std::string, double> timings_ms;
};

// ingest -> anchors -> stage-1 train -> stage-1 self-train -> purpose
// inference -> chain features -> stage-2 train -> stage-2 self-train -> vote,
// plus evaluation.json when the truth file exists. Artifacts and
// manifest.json land in c.out. A failing stage aborts with "<stage>: <cause>".
run_summary run_all(run_config const& c);

}  // namespace tripinfer::pipeline

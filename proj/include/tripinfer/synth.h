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
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tripinfer/common.h"
#include "tripinfer/ingest.h"
#include "tripinfer/matrix.h"
#include "tripinfer/metrics.h"

namespace tripinfer::synth {

// Synthetic city: a grid of 1 km cells with stations of five roles
// (residential, office, campus, hospital, commercial), survey respondents
// observed on one day with labels, and card holders observed over several
// days without labels.
struct config {
  std::uint64_t seed{42};
  int nx{20};
  int ny{20};
  double cell_km{1.0};
  double origin_lon{113.9};
  double origin_lat{22.5};

  int stations{400};
  int office_stations{60};
  int campus_stations{10};
  int hospital_stations{8};
  int commercial_stations{40};

  std::size_t survey_users{1500};
  std::size_t card_users{500};
  int card_days{5};
  std::string survey_date{"2020-11-10"};
  std::string card_start{"2018-10-08"};

  // Marginals in enum order.
  std::array<double, 3> age{0.173, 0.790, 0.037};  // source table sums to 101%
  std::array<double, 3> job{0.698, 0.156, 0.146};
  std::array<double, 4> income{0.118, 0.606, 0.198, 0.078};
  double female_share{0.52};
  double car_share{0.327};

  // Probability that age follows job along the shared latent order
  // (student < worker < retired, young < adult < old); otherwise age is
  // drawn independently. Both ways keep the age marginal.
  double coupling{0.9};
  // Share of commuter days with an evening shopping/leisure stop.
  double detour_rate{0.0725};
  // Share of non-commuter excursions that are medical.
  double medical_share{0.0706};

  double jitter_minutes{10.0};    // day-to-day time noise
  double transfer_rate{0.2};      // trips split into two rides
  double alt_home_rate{0.05};     // mornings boarding at a stop other than home
  double missing_poi_rate{0.02};  // stations absent from poi.csv
  // Card population only: later departures and more evening stops.
  // 0 makes the card and survey populations identically distributed.
  double shift{0.3};

  // Throws usage_error; infeasible station counts also throw.
  void validate() const;

  ingest::bbox bounds() const;

  friend bool operator==(config const&, config const&) = default;
};

struct agent_truth {
  std::string user_id;
  age_band age{};
  job_status job{};
  income_band income{};
};

struct truth_trip {
  std::string user_id;
  ingest::date service_date;
  int trip_seq{};  // 1-based within (user, date) by departure
  purpose trip_purpose{};
};

struct dataset {
  std::vector<ingest::survey_person> survey;
  std::vector<ingest::ride_record> rides;  // canonical order
  std::vector<ingest::station_poi_profile> poi;
  std::vector<ingest::raster_value> population;
  std::vector<ingest::raster_value> land_price;
  std::vector<agent_truth> card_agents;
  std::vector<truth_trip> truth;  // card trips, (user, date, seq) order
};

// Same config => identical dataset for any thread count.
dataset generate(config const& cfg, unsigned threads = 1);

// truth.csv: user_id,date,trip_seq,purpose,age_band,job_status,income_band
void write_truth(std::ostream& out, dataset const& d);

struct truth_table {
  std::map<std::tuple<std::string, std::string, int>, purpose> trips;  // (user, date, seq)
  std::map<std::string, agent_truth> agents;
};
truth_table parse_truth(std::istream& in);

// Writes survey.csv, rides.csv, poi.csv, population.csv, land_price.csv,
// truth.csv and fixture.cfg into `dir`.
void write_dataset(dataset const& d, config const& cfg, std::filesystem::path const& dir);

struct predictions {
  std::map<std::tuple<std::string, std::string, int>, purpose> trips;
  std::map<std::string, std::tuple<age_band, job_status, income_band>> profiles;
};

struct holdout_report {
  metrics::classification_report purpose;
  metrics::classification_report age;
  metrics::classification_report job;
  metrics::classification_report income;
};

// Scores predictions against the truth; the id sets must match exactly
// (data_error otherwise). An empty prediction side skips that part.
holdout_report holdout_truth(truth_table const& truth, predictions const& p);

// Gaussian blobs: `classes` centres drawn in [-spread, spread]^features,
// unit-variance points, labels balanced.
struct labeled_set {
  matrix x;
  std::vector<int> y;
};
labeled_set make_blobs(std::size_t n, std::size_t classes, std::size_t features, double spread,
                       std::uint64_t seed);

}  // namespace tripinfer::synth

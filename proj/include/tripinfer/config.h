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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "tripinfer/anchors.h"
#include "tripinfer/gbdt.h"
#include "tripinfer/ingest.h"
#include "tripinfer/selftrain.h"
#include "tripinfer/synth.h"

namespace tripinfer {

// Everything a run needs. Text form is INI with the sections [input],
// [grid], [thresholds], [train], [run] and [synth]; see to_ini() for the full
// key set with defaults.
struct run_config {
  // [input]; relative paths resolve against the config file's directory.
  std::filesystem::path survey{"survey.csv"};
  std::filesystem::path rides{"rides.csv"};
  std::filesystem::path poi{"poi.csv"};
  std::filesystem::path population{"population.csv"};
  std::filesystem::path land_price{"land_price.csv"};
  std::filesystem::path truth{"truth.csv"};
  char delimiter{','};

  // [grid]
  ingest::bbox box{synth::config{}.bounds()};
  double cell_km{1.0};

  // [thresholds]
  seconds_t transfer{ingest::kDefaultTransferThreshold};
  anchors::anchor_params anchor;
  double tau{0.9};
  double tau_min{0.0};
  std::size_t max_trips{5};

  // [train]
  gbdt::train_config train;
  std::vector<double> grid_eta;        // empty: no grid search over eta
  std::vector<int> grid_max_depth;     // empty: no grid search over depth
  double validation_fraction{0.2};
  int max_iters{10};
  std::size_t score_cap{10000};

  // [run]
  std::uint64_t seed{42};
  std::filesystem::path out{"out"};
  unsigned threads{0};  // 0: machine default

  // [synth]
  synth::config generator;

  // Throws usage_error naming the offending key.
  void validate() const;

  selftrain::config selftrain_config() const;

  // Candidate grid for model selection, base config first.
  std::vector<gbdt::train_config> train_grid() const;

  unsigned thread_count() const;
};

// Unknown sections or keys and malformed values throw usage_error.
run_config parse_config(std::istream& in, std::filesystem::path const& base_dir = {});
run_config load_config(std::filesystem::path const& path);

// Canonical text form; parse_config(to_ini(c)) == c for absolute or
// base-relative paths.
std::string to_ini(run_config const& c);

}  // namespace tripinfer

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
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripinfer/common.h"
#include "tripinfer/ingest.h"
#include "tripinfer/matrix.h"

namespace tripinfer::features {

constexpr std::size_t kTripFeatureCount = 17;
constexpr std::size_t kChainTripSlots = 5;
constexpr std::size_t kChainTripBlock = 11;
constexpr std::size_t kChainAnchorBlock = 4;
constexpr std::size_t kChainFeatureCount = 2 * kChainAnchorBlock + kChainTripSlots * kChainTripBlock;

using trip_features = std::array<double, kTripFeatureCount>;
using chain_features = std::array<double, kChainFeatureCount>;

constexpr std::array<std::string_view, kTripFeatureCount> kTripFeatureNames{
    "cos_boardtime",    "cos_alighttime",   "time_interval",   "board_catering",
    "board_education",  "board_leisure",    "board_shopping",  "board_hospital",
    "board_company",    "board_residence",  "alight_catering", "alight_education",
    "alight_leisure",   "alight_shopping",  "alight_hospital", "alight_company",
    "alight_residence"};

// Home_X..Work_LP, then Dep_Time1..Purpose5_4.
std::array<std::string, kChainFeatureCount> const& chain_feature_names();

// Attribution groups for the chain layout: "jobs-housing", "purpose" or
// "spatiotemporal".
std::string_view chain_feature_group(std::size_t index);

// Groups for the trip layout: "temporal" or "land-use".
std::string_view trip_feature_group(std::size_t index);

// cos(2*pi*t/period); t must lie in [0, period).
double cos_time(seconds_t t, seconds_t period = kSecondsPerDay);

// cos(2*pi*index/count); index must lie in [0, count).
double cos_grid(int index, int count);

// A stop without a profile contributes seven zeros and bumps
// *missing_profiles when given.
trip_features trip_feature_vector(ingest::trip const& t, ingest::poi_table const& poi,
                                  std::size_t* missing_profiles = nullptr);

// Location of a user's anchors; an absent anchor encodes as -1 in its block.
struct anchor_points {
  std::optional<ingest::location> home;
  std::optional<ingest::location> work;
};

// `chain` is one user's day sorted by departure; `purposes` is aligned with
// it. Trips past `max_trips` (at most 5) are ignored, empty slots are -1.
chain_features chain_feature_vector(std::span<ingest::trip const> chain,
                                    anchor_points const& anchors, ingest::grid const& g,
                                    std::span<purpose const> purposes,
                                    std::size_t max_trips = kChainTripSlots);

// Trip features for many trips; row i belongs to trips[i]. Output does not
// depend on `threads`.
matrix trip_feature_matrix(std::span<ingest::trip const> trips, ingest::poi_table const& poi,
                           unsigned threads = 1, std::size_t* missing_profiles = nullptr);

void write_matrix_csv(std::ostream& out, matrix const& m, std::span<std::string const> names);

// "TIFM" magic, u32 version = 1, u64 rows, u64 cols, then rows*cols
// little-endian IEEE-754 doubles in row-major order.
void write_matrix_binary(std::ostream& out, matrix const& m);
matrix read_matrix_binary(std::istream& in);

}  // namespace tripinfer::features

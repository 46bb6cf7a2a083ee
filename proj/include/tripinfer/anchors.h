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

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tripinfer/common.h"
#include "tripinfer/ingest.h"

namespace tripinfer::anchors {

struct anchor_params {
  seconds_t cutoff{15 * 3600};
  double threshold{0.6};
  // Single-day frequency is trivially 1.0, so detection needs at least this
  // many days with a qualifying candidate.
  std::size_t min_days{2};
};

struct detection {
  std::optional<std::string> stop;  // set iff frequency > threshold and enough days
  double frequency{};               // f(argmax candidate); 0 without candidates
  std::size_t qualifying_days{};
};

struct anchor_result {
  std::string user_id;
  std::optional<std::string> home_stop;
  std::optional<std::string> work_stop;
  double home_freq{};
  double work_freq{};
  std::size_t qualifying_days{};  // days with a home or a work candidate

  bool anchored() const { return home_stop.has_value() && work_stop.has_value(); }
};

// Home candidate of a day: origin of the first trip departing strictly before
// the cutoff. f(s) counts days whose candidate is s over days with any
// candidate; ties go to the lexicographically lowest stop id.
detection detect_home(std::span<ingest::trip const> user_trips, anchor_params const& p = {});

// Work candidate of a day: origin of the last trip departing strictly after
// the cutoff.
detection detect_work(std::span<ingest::trip const> user_trips, anchor_params const& p = {});

// `user_trips` must all belong to one user.
anchor_result detect(std::span<ingest::trip const> user_trips, anchor_params const& p = {});

// Runs detect() for each user of a trip list in (user_id, ...) order.
std::vector<anchor_result> detect_all(std::span<ingest::trip const> trips,
                                      anchor_params const& p = {}, unsigned threads = 1);

// Work when alighting at the work anchor, Home at the home anchor; no label
// when neither matches or both do.
std::optional<purpose> rule_label(ingest::trip const& t, anchor_result const& a);

// user_id,home_stop,home_freq,work_stop,work_freq,qualifying_days
void write_anchors(std::ostream& out, std::span<anchor_result const> results);

}  // namespace tripinfer::anchors

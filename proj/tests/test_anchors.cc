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

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.h"
#include "tripinfer/anchors.h"
#include "tripinfer/random.h"

using namespace tripinfer;
using namespace tripinfer::anchors;
using ingest::trip;

namespace {

trip make_trip(int day, seconds_t dep, std::string origin, std::string dest = "X") {
  ingest::ride_record r;
  r.user_id = "U";
  r.service_date = ingest::date{std::chrono::year{2018}, std::chrono::month{10}, std::chrono::day{static_cast<unsigned>(day)}};
  r.route_id = "R";
  r.board_time = dep;
  r.alight_time = dep + 600;
  r.board_stop = std::move(origin);
  r.alight_stop = std::move(dest);
  return trip{r.user_id, r.service_date, {r}, std::nullopt, label_source::none};
}

std::vector<trip> random_log(rng& r) {
  std::vector<trip> trips;
  auto const days = 1 + static_cast<int>(r.below(10));
  auto const stops = 1 + r.below(5);
  for (int d = 1; d <= days; ++d) {
    auto const n = r.below(4);
    for (std::uint64_t k = 0; k < n; ++k) {
      // Coarse times so equal departures and the exact cutoff both occur.
      auto const dep = static_cast<seconds_t>(r.below(24)) * 3600;
      trips.push_back(make_trip(d, dep, "S" + std::to_string(r.below(stops))));
    }
  }
  return trips;
}

}  // namespace

TEST(DetectHome, TwoOfThreeDays) {
  std::vector<trip> t{make_trip(1, 8 * 3600, "S1"), make_trip(1, 18 * 3600, "S9"),
                      make_trip(2, 7 * 3600, "S1"), make_trip(3, 9 * 3600, "S2")};
  auto const d = detect_home(t);
  ASSERT_TRUE(d.stop);
  EXPECT_EQ(*d.stop, "S1");
  EXPECT_DOUBLE_EQ(d.frequency, 2.0 / 3.0);
}

TEST(DetectHome, EvenSplitIsNotAnAnchor) {
  std::vector<trip> t{make_trip(1, 8 * 3600, "S1"), make_trip(2, 8 * 3600, "S2")};
  auto const d = detect_home(t);
  EXPECT_FALSE(d.stop);
  EXPECT_DOUBLE_EQ(d.frequency, 0.5);
}

TEST(DetectHome, NoMorningTrips) {
  std::vector<trip> t{make_trip(1, 16 * 3600, "S1"), make_trip(2, 17 * 3600, "S1")};
  auto const d = detect_home(t);
  EXPECT_FALSE(d.stop);
  EXPECT_EQ(d.qualifying_days, 0U);
}

TEST(DetectWork, MirrorCases) {
  std::vector<trip> a{make_trip(1, 17 * 3600, "W1"), make_trip(1, 8 * 3600, "H"),
                      make_trip(2, 18 * 3600, "W1"), make_trip(3, 17 * 3600, "W2")};
  auto const d = detect_work(a);
  ASSERT_TRUE(d.stop);
  EXPECT_EQ(*d.stop, "W1");
  EXPECT_DOUBLE_EQ(d.frequency, 2.0 / 3.0);

  std::vector<trip> b{make_trip(1, 17 * 3600, "W1"), make_trip(2, 17 * 3600, "W2")};
  EXPECT_FALSE(detect_work(b).stop);

  std::vector<trip> c{make_trip(1, 8 * 3600, "W1"), make_trip(2, 15 * 3600, "W1")};
  EXPECT_FALSE(detect_work(c).stop);
  EXPECT_EQ(detect_work(c).qualifying_days, 0U);
}

TEST(DetectWork, LastEveningTripIsTheCandidate) {
  std::vector<trip> t{make_trip(1, 16 * 3600, "W"), make_trip(1, 20 * 3600, "L"),
                      make_trip(2, 16 * 3600, "W"), make_trip(2, 20 * 3600, "L")};
  EXPECT_EQ(*detect_work(t).stop, "L");
}

TEST(Anchors, CutoffDepartureQualifiesForNeither) {
  std::vector<trip> t{make_trip(1, 15 * 3600, "S1"), make_trip(2, 15 * 3600, "S1")};
  EXPECT_EQ(detect_home(t).qualifying_days, 0U);
  EXPECT_EQ(detect_work(t).qualifying_days, 0U);
}

TEST(Anchors, SingleDayNeedsMinDays) {
  std::vector<trip> t{make_trip(1, 8 * 3600, "S1")};
  EXPECT_FALSE(detect_home(t).stop);
  anchor_params p;
  p.min_days = 1;
  EXPECT_EQ(*detect_home(t, p).stop, "S1");
}

TEST(Anchors, MatchesExhaustiveEnumeration) {
  rng r{2024};
  for (int k = 0; k < 1000; ++k) {
    auto const log = random_log(r);
    anchor_params p;
    for (bool const home : {true, false}) {
      auto const want = oracle::detect(log, p, home);
      auto const got = home ? detect_home(log, p) : detect_work(log, p);
      ASSERT_EQ(got.stop, want.stop) << "case " << k;
      ASSERT_EQ(got.qualifying_days, want.days);
      if (want.days > 0) {
        ASSERT_DOUBLE_EQ(got.frequency, want.frequency);
      }
      ASSERT_GE(got.frequency, 0.0);
      ASSERT_LE(got.frequency, 1.0);
      if (got.stop) {
        ASSERT_GT(got.frequency, p.threshold);
      }
    }
  }
}

TEST(Anchors, DateOrderDoesNotMatter) {
  rng r{5};
  for (int k = 0; k < 200; ++k) {
    auto log = random_log(r);
    auto const base = detect(log);
    r.shuffle(std::span<trip>{log});
    auto const shuffled = detect(log);
    EXPECT_EQ(base.home_stop, shuffled.home_stop);
    EXPECT_EQ(base.work_stop, shuffled.work_stop);
    EXPECT_EQ(base.home_freq, shuffled.home_freq);
  }
}

TEST(Anchors, AgreeingDayKeepsAnchor) {
  rng r{6};
  for (int k = 0; k < 300; ++k) {
    auto log = random_log(r);
    auto const before = detect_home(log);
    if (!before.stop) {
      continue;
    }
    log.push_back(make_trip(25, 6 * 3600, *before.stop));
    auto const after = detect_home(log);
    ASSERT_TRUE(after.stop);
    EXPECT_EQ(*after.stop, *before.stop);
    EXPECT_GE(after.frequency, before.frequency);
  }
}

TEST(RuleLabel, WorkHomeNeitherAndAmbiguous) {
  anchor_result a;
  a.user_id = "U";
  a.home_stop = "H";
  a.work_stop = "W";
  EXPECT_EQ(rule_label(make_trip(1, 8 * 3600, "H", "W"), a), purpose::work);
  EXPECT_EQ(rule_label(make_trip(1, 18 * 3600, "W", "H"), a), purpose::home);
  EXPECT_FALSE(rule_label(make_trip(1, 12 * 3600, "W", "M"), a));
  a.work_stop = "H";
  EXPECT_FALSE(rule_label(make_trip(1, 18 * 3600, "W", "H"), a));
}

TEST(Anchors, CsvOutput) {
  anchor_result a;
  a.user_id = "U1";
  a.home_stop = "H";
  a.home_freq = 0.8;
  a.qualifying_days = 5;
  std::ostringstream out;
  write_anchors(out, std::vector<anchor_result>{a});
  EXPECT_EQ(out.str(), "user_id,home_stop,home_freq,work_stop,work_freq,qualifying_days\nU1,H,0.8,,0,5\n");
}

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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oracles.h"
#include "tripinfer/anchors.h"
#include "tripinfer/random.h"
#include "tripinfer/synth.h"

using namespace tripinfer;
namespace fs = std::filesystem;

namespace {

synth::config small(std::uint64_t seed) {
  synth::config c;
  c.seed = seed;
  c.survey_users = 300;
  c.card_users = 100;
  c.card_days = 3;
  return c;
}

std::string slurp(fs::path const& p) {
  std::ifstream in{p, std::ios::binary};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(std::string const& name) {
  auto const dir = fs::temp_directory_path() / ("tripinfer_synth_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> survey_departures(synth::dataset const& d) {
  std::vector<double> out;
  for (auto const& p : d.survey)
    for (auto const& t : p.trips) out.push_back(static_cast<double>(t.dep_time));
  return out;
}

// Departures of card trips on the first observed day, one draw per agent-day
// like the survey.
std::vector<double> card_departures(synth::dataset const& d) {
  auto const trips = ingest::merge_transfers(d.rides);
  std::vector<double> out;
  for (auto const& t : trips) {
    if (t.service_date == d.rides.front().service_date) out.push_back(static_cast<double>(t.dep_time()));
  }
  return out;
}

}  // namespace

TEST(Generate, SameSeedSameFiles) {
  auto const cfg = small(7);
  auto const a = scratch("a");
  auto const b = scratch("b");
  synth::write_dataset(synth::generate(cfg, 1), cfg, a);
  synth::write_dataset(synth::generate(cfg, 4), cfg, b);
  std::size_t files = 0;
  for (auto const& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_EQ(files, 7U);
  auto other = cfg;
  other.seed = 8;
  auto const c = scratch("c");
  synth::write_dataset(synth::generate(other), other, c);
  EXPECT_NE(slurp(a / "rides.csv"), slurp(c / "rides.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST(Generate, SurveyPurposeMarginals) {
  // Work 41.4%, Home 48.5%, S&E 9.6%, Medical 0.5%.
  std::array<double, 4> const want{0.414, 0.485, 0.096, 0.005};
  synth::config c;
  c.survey_users = 2450;
  c.card_users = 10;
  auto const d = synth::generate(c);
  std::array<double, 4> count{};
  double n = 0.0;
  for (auto const& p : d.survey) {
    for (auto const& t : p.trips) {
      count[static_cast<std::size_t>(t.trip_purpose)] += 1.0;
      n += 1.0;
    }
  }
  EXPECT_GE(n, 5000.0);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(count[k] / n, want[k], 0.02) << kPurposeNames[k];
  }
}

TEST(Generate, WorkersHaveHomeAnchors) {
  synth::config c;
  c.survey_users = 10;
  auto const d = synth::generate(c);
  auto const trips = ingest::merge_transfers(d.rides);
  std::map<std::string, std::vector<ingest::trip>> by_user;
  for (auto const& t : trips) by_user[t.user_id].push_back(t);
  double workers = 0.0, anchored = 0.0;
  for (auto const& a : d.card_agents) {
    if (a.job != job_status::with_job) continue;
    workers += 1.0;
    if (anchors::detect_home(by_user[a.user_id]).stop) anchored += 1.0;
  }
  ASSERT_GT(workers, 100.0);
  EXPECT_GE(anchored / workers, 0.95);
}

TEST(Generate, RidesPassIngestion) {
  auto const cfg = small(3);
  auto const d = synth::generate(cfg);
  std::stringstream s;
  ingest::write_rides(s, d.rides);
  ingest::parse_options opt;
  opt.bounds = cfg.bounds();
  auto const parsed = ingest::parse_rides(s, opt);
  EXPECT_TRUE(parsed.rejections.empty());
  EXPECT_EQ(parsed.records, d.rides);
  auto sorted = d.rides;
  ingest::sort_rides(sorted);
  EXPECT_EQ(sorted, d.rides);

  std::stringstream sv;
  ingest::write_survey(sv, d.survey);
  EXPECT_EQ(ingest::parse_survey(sv).size(), d.survey.size());
}

TEST(Generate, NoShiftMeansSamePopulation) {
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::config c;
    c.seed = seed;
    c.shift = 0.0;
    c.survey_users = 600;
    c.card_users = 600;
    c.card_days = 1;
    auto const d = synth::generate(c);
    auto const p = oracle::ks_pvalue(survey_departures(d), card_departures(d));
    if (p > 0.01) ++passes;
  }
  EXPECT_EQ(passes, 10);
}

TEST(Generate, ShiftIsDetectable) {
  synth::config c;
  c.shift = 1.0;
  c.survey_users = 600;
  c.card_users = 600;
  c.card_days = 1;
  auto const d = synth::generate(c);
  EXPECT_LT(oracle::ks_pvalue(survey_departures(d), card_departures(d)), 0.01);
}

TEST(Config, Validation) {
  synth::config c;
  EXPECT_NO_THROW(c.validate());
  c.stations = 50;
  EXPECT_THROW(c.validate(), usage_error);
  c = {};
  c.job = {0.5, 0.5, 0.5};
  EXPECT_THROW(c.validate(), usage_error);
  c = {};
  c.transfer_rate = 1.5;
  EXPECT_THROW(c.validate(), usage_error);
}

TEST(Truth, RoundTripAndHoldout) {
  auto const d = synth::generate(small(5));
  std::stringstream s;
  synth::write_truth(s, d);
  auto const truth = synth::parse_truth(s);
  EXPECT_EQ(truth.trips.size(), d.truth.size());
  EXPECT_EQ(truth.agents.size(), d.card_agents.size());

  synth::predictions exact;
  exact.trips = truth.trips;
  for (auto const& [id, a] : truth.agents) exact.profiles[id] = {a.age, a.job, a.income};
  auto const r = synth::holdout_truth(truth, exact);
  EXPECT_EQ(r.purpose.overall_accuracy, 1.0);
  EXPECT_EQ(r.age.overall_accuracy, 1.0);
  EXPECT_EQ(r.job.overall_accuracy, 1.0);
  EXPECT_EQ(r.income.overall_accuracy, 1.0);

  // Shuffled purposes: agreement drops to what the marginals give by chance.
  std::vector<purpose> labels;
  for (auto const& [k, p] : truth.trips) labels.push_back(p);
  rng g{1};
  g.shuffle(std::span<purpose>{labels});
  synth::predictions shuffled;
  std::size_t i = 0;
  for (auto const& [k, p] : truth.trips) shuffled.trips[k] = labels[i++];
  double chance = 0.0;
  std::array<double, 4> share{};
  for (auto const p : labels) share[static_cast<std::size_t>(p)] += 1.0 / static_cast<double>(labels.size());
  for (auto const v : share) chance += v * v;
  EXPECT_NEAR(synth::holdout_truth(truth, shuffled).purpose.overall_accuracy, chance, 0.05);

  synth::predictions disjoint;
  disjoint.trips[{"nobody", "2018-10-08", 1}] = purpose::home;
  EXPECT_THROW(synth::holdout_truth(truth, disjoint), data_error);
}

TEST(Blobs, BalancedAndSeeded) {
  auto const a = synth::make_blobs(100, 4, 3, 2.0, 1);
  auto const b = synth::make_blobs(100, 4, 3, 2.0, 1);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  std::array<int, 4> count{};
  for (auto const y : a.y) ++count[static_cast<std::size_t>(y)];
  for (auto const c : count) EXPECT_EQ(c, 25);
}

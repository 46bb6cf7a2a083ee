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

#include "tripinfer/config.h"

using namespace tripinfer;

namespace {

run_config parse(std::string const& text, std::filesystem::path const& base = {}) {
  std::istringstream in{text};
  return parse_config(in, base);
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  run_config const c;
  auto const text = to_ini(c);
  EXPECT_EQ(to_ini(parse(text)), text);
  EXPECT_NE(text.find("anchor_freq = 0.6"), std::string::npos);
  EXPECT_NE(text.find("transfer = 3600"), std::string::npos);
  EXPECT_NE(text.find("anchor_cutoff = 54000"), std::string::npos);
}

TEST(Config, EmptyFileGivesDefaults) {
  auto const c = parse("");
  EXPECT_EQ(to_ini(c), to_ini(run_config{}));
}

TEST(Config, OverridesAndRelativePaths) {
  auto const c = parse("[thresholds]\ntau = 0.8\n[train]\ngrid_eta = 0.05,0.3\n[input]\nrides = r.csv\n", "/data");
  EXPECT_EQ(c.tau, 0.8);
  EXPECT_EQ(c.grid_eta, (std::vector<double>{0.05, 0.3}));
  EXPECT_EQ(c.rides, std::filesystem::path{"/data/r.csv"});
  EXPECT_EQ(c.train_grid().size(), 3U);  // base plus two etas
  EXPECT_EQ(c.train_grid().front().seed, c.seed);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse("[thresholds]\nanchor_freq = 1.5\n"), usage_error);
  EXPECT_THROW(parse("[thresholds]\ntau = 0\n"), usage_error);
  EXPECT_THROW(parse("[thresholds]\ntau_min = 0.95\n"), usage_error);
  EXPECT_THROW(parse("[thresholds]\nmax_trips = 6\n"), usage_error);
  EXPECT_THROW(parse("[train]\neta = 0\n"), usage_error);
  EXPECT_THROW(parse("[train]\nrounds = many\n"), usage_error);
  EXPECT_THROW(parse("[nope]\nx = 1\n"), usage_error);
  EXPECT_THROW(parse("[train]\nunknown = 1\n"), usage_error);
  EXPECT_THROW(parse("[grid]\nmin_lon = 200\n"), usage_error);
  EXPECT_THROW(load_config("/nonexistent/tripinfer.cfg"), usage_error);
}

TEST(Config, MessageNamesTheKey) {
  try {
    parse("[thresholds]\nanchor_freq = 1.5\n");
    FAIL();
  } catch (usage_error const& e) {
    EXPECT_NE(std::string{e.what()}.find("anchor_freq"), std::string::npos);
  }
}

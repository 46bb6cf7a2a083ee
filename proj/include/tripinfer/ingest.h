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
#include <chrono>
#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tripinfer/common.h"

namespace tripinfer::ingest {

using date = std::chrono::year_month_day;

// "YYYY-MM-DD"
std::optional<date> parse_date(std::string_view s);
std::string format_date(date d);

struct bbox {
  double min_lon{}, min_lat{}, max_lon{}, max_lat{};

  bool contains(double lon, double lat) const {
    return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
  }
};

// One fare swipe.
struct ride_record {
  std::string user_id;
  date service_date;
  std::string route_id;
  seconds_t board_time{};
  seconds_t alight_time{};
  std::string board_stop;
  std::string alight_stop;
  double board_lon{}, board_lat{};
  double alight_lon{}, alight_lat{};

  friend bool operator==(ride_record const&, ride_record const&) = default;
};

// One or more rides chained by transfers.
struct trip {
  std::string user_id;
  date service_date;
  std::vector<ride_record> legs;
  std::optional<purpose> trip_purpose;
  label_source source{label_source::none};

  seconds_t dep_time() const { return legs.front().board_time; }
  seconds_t arr_time() const { return legs.back().alight_time; }
  std::string const& origin_stop() const { return legs.front().board_stop; }
  std::string const& dest_stop() const { return legs.back().alight_stop; }
  double origin_lon() const { return legs.front().board_lon; }
  double origin_lat() const { return legs.front().board_lat; }
  double dest_lon() const { return legs.back().alight_lon; }
  double dest_lat() const { return legs.back().alight_lat; }
};

// Header names for each logical ride field. Defaults are the canonical
// rides.csv schema.
struct ride_schema {
  std::string user_id{"user_id"};
  std::string date{"date"};
  std::string route{"route"};
  std::string board_time{"board_time"};
  std::string alight_time{"alight_time"};
  std::string board_stop{"board_stop"};
  std::string alight_stop{"alight_stop"};
  std::string board_lon{"board_lon"};
  std::string board_lat{"board_lat"};
  std::string alight_lon{"alight_lon"};
  std::string alight_lat{"alight_lat"};
};

struct parse_options {
  char delimiter{','};
  std::optional<bbox> bounds;
  ride_schema schema;
};

struct rejection {
  std::size_t row{};  // 1-based data row; the header is row 0
  std::string reason;
};

struct parse_result {
  std::vector<ride_record> records;
  std::vector<rejection> rejections;
};

// Malformed or invariant-violating rows are rejected individually. A missing
// mandatory column or an unreadable stream throws data_error.
parse_result parse_rides(std::istream& in, parse_options const& options = {});

void write_rides(std::ostream& out, std::span<ride_record const> rides, char delimiter = ',');
void write_rejections(std::ostream& out, std::span<rejection const> rejections);

// Canonical order: (user_id, service_date, board_time, alight_time).
void sort_rides(std::vector<ride_record>& rides);

constexpr seconds_t kDefaultTransferThreshold = 3600;

// Chains rides of the same (user, date) whose gap (next board_time minus
// previous alight_time) is strictly below `threshold`. Input must be grouped
// by (user, date) with each group sorted by board_time; a violation throws
// std::invalid_argument. Output is in (user_id, date, dep_time) order and
// does not depend on `threads`.
std::vector<trip> merge_transfers(std::span<ride_record const> rides,
                                  seconds_t threshold = kDefaultTransferThreshold,
                                  unsigned threads = 1);

std::vector<ride_record> flatten(std::span<trip const> trips);

// ---------------------------------------------------------------------------
// POI profiles

enum class poi_category : std::uint8_t {
  catering,
  education,
  leisure,
  shopping,
  hospital,
  company,
  residence
};
constexpr std::size_t kNumPoiCategories = 7;
constexpr std::array<std::string_view, kNumPoiCategories> kPoiCategoryNames{
    "catering", "education", "leisure", "shopping", "hospital", "company", "residence"};

struct station_poi_profile {
  std::string stop_id;
  std::array<double, kNumPoiCategories> proportions{};
};

using poi_table = std::unordered_map<std::string, station_poi_profile>;

// poi.csv: stop_id,catering,education,leisure,shopping,hospital,company,residence
poi_table parse_poi(std::istream& in, char delimiter = ',');
void write_poi(std::ostream& out, std::span<station_poi_profile const> profiles);

// ---------------------------------------------------------------------------
// Grid

struct grid_cell {
  int cell_id{};
  int x_index{};
  int y_index{};
  double population_density{};
  double land_price{};
};

// Regular lon/lat lattice anchored at the south-west corner. Cells are
// half-open: [x*step, (x+1)*step).
struct grid_spec {
  double min_lon{}, min_lat{};
  double lon_step{}, lat_step{};
  int nx{}, ny{};

  // Sizes cells to `cell_km` kilometres at the box's mid latitude.
  static grid_spec from_bbox(bbox const& box, double cell_km = 1.0);
  bbox bounds() const;
  int cell_id(int x, int y) const { return y * nx + x; }
};

struct raster_value {
  int x_index{};
  int y_index{};
  double value{};
};

// x_index,y_index,value
std::vector<raster_value> parse_raster(std::istream& in, char delimiter = ',');
void write_raster(std::ostream& out, std::span<raster_value const> values);

class grid {
public:
  grid(grid_spec spec, std::vector<grid_cell> cells);

  grid_spec const& spec() const { return spec_; }
  std::span<grid_cell const> cells() const { return cells_; }
  grid_cell const& at(int x, int y) const { return cells_[static_cast<std::size_t>(spec_.cell_id(x, y))]; }

private:
  grid_spec spec_;
  std::vector<grid_cell> cells_;
};

// Both rasters must cover every cell exactly once; holes are reported as a
// data_error listing the missing cells.
grid load_grid(grid_spec const& spec, std::span<raster_value const> population,
               std::span<raster_value const> land_price);

// Throws data_error when the point lies outside the grid extent.
grid_cell const& locate(double lon, double lat, grid const& g);

// ---------------------------------------------------------------------------
// Survey

enum class gender : std::uint8_t { male, female };
constexpr std::array<std::string_view, 2> kGenderNames{"Male", "Female"};

struct location {
  std::string stop_id;
  double lon{}, lat{};

  friend bool operator==(location const&, location const&) = default;
};

struct survey_trip {
  int trip_seq{};
  seconds_t dep_time{};
  seconds_t arr_time{};
  location origin;
  location dest;
  purpose trip_purpose{};
};

struct survey_person {
  std::string person_id;
  date survey_date;
  gender sex{};
  age_band age{};
  income_band income{};
  job_status job{};
  bool car_owner{};
  location home;
  std::optional<location> work;
  std::vector<survey_trip> trips;
};

// survey.csv: one row per trip, person fields repeated on every row.
std::vector<survey_person> parse_survey(std::istream& in, char delimiter = ',');
void write_survey(std::ostream& out, std::span<survey_person const> people);

// Single-leg trips labelled with the surveyed purpose.
std::vector<trip> to_trips(survey_person const& person);

}  // namespace tripinfer::ingest

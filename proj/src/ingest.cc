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

#include "tripinfer/ingest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include "tripinfer/csv.h"
#include "tripinfer/parallel.h"

namespace tripinfer::ingest {

namespace {

constexpr double kKmPerDegreeLat = 110.574;
constexpr double kKmPerDegreeLonEquator = 111.320;

struct group_key_hash {
  std::size_t operator()(std::pair<std::string_view, int> const& k) const {
    return std::hash<std::string_view>{}(k.first) * 31U + static_cast<std::size_t>(k.second);
  }
};

int day_number(date d) { return std::chrono::sys_days{d}.time_since_epoch().count(); }

bool same_group(ride_record const& a, ride_record const& b) {
  return a.user_id == b.user_id && a.service_date == b.service_date;
}

void merge_group(std::span<ride_record const> group, seconds_t threshold, std::vector<trip>& out) {
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (i != 0 && group[i].board_time < group[i - 1].board_time) {
      throw std::invalid_argument("merge_transfers: rides of user '" + group[i].user_id +
                                  "' on " + format_date(group[i].service_date) +
                                  " are not sorted by board_time");
    }
    auto const gap = i == 0 ? threshold : group[i].board_time - group[i - 1].alight_time;
    if (i == 0 || gap >= threshold) {
      out.push_back(trip{.user_id = group[i].user_id,
                         .service_date = group[i].service_date,
                         .legs = {},
                         .trip_purpose = std::nullopt,
                         .source = label_source::none});
    }
    out.back().legs.push_back(group[i]);
  }
}

std::optional<double> field_double(std::vector<std::string> const& row, std::size_t col) {
  return csv::parse_double(row[col]);
}

location read_location(std::vector<std::string> const& row, std::size_t stop_col,
                       std::size_t lon_col, std::size_t lat_col, std::string const& what) {
  auto const lon = csv::parse_double(row[lon_col]);
  auto const lat = csv::parse_double(row[lat_col]);
  if (row[stop_col].empty() || !lon || !lat) {
    throw data_error("invalid " + what + " location");
  }
  return location{row[stop_col], *lon, *lat};
}

}  // namespace

std::optional<date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    return std::nullopt;
  }
  auto const y = csv::parse_int(s.substr(0, 4));
  auto const m = csv::parse_int(s.substr(5, 2));
  auto const d = csv::parse_int(s.substr(8, 2));
  if (!y || !m || !d) {
    return std::nullopt;
  }
  auto const ymd = date{std::chrono::year{static_cast<int>(*y)},
                        std::chrono::month{static_cast<unsigned>(*m)},
                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) {
    return std::nullopt;
  }
  return ymd;
}

std::string format_date(date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

parse_result parse_rides(std::istream& in, parse_options const& options) {
  if (!in) {
    throw data_error("rides: unreadable source");
  }
  csv::reader reader{in, options.delimiter};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("rides: missing header row");
  }
  auto const hdr = csv::header{row};
  auto const& s = options.schema;
  auto const c_user = hdr.require(s.user_id);
  auto const c_date = hdr.require(s.date);
  auto const c_route = hdr.require(s.route);
  auto const c_board_time = hdr.require(s.board_time);
  auto const c_alight_time = hdr.require(s.alight_time);
  auto const c_board_stop = hdr.require(s.board_stop);
  auto const c_alight_stop = hdr.require(s.alight_stop);
  auto const c_board_lon = hdr.require(s.board_lon);
  auto const c_board_lat = hdr.require(s.board_lat);
  auto const c_alight_lon = hdr.require(s.alight_lon);
  auto const c_alight_lat = hdr.require(s.alight_lat);
  auto const width = hdr.names().size();

  parse_result result;
  while (reader.next(row)) {
    auto const row_number = reader.record_number();
    auto reject = [&](std::string reason) {
      result.rejections.push_back(rejection{row_number, std::move(reason)});
    };
    if (row.size() == 1 && row[0].empty()) {
      continue;  // blank line
    }
    if (row.size() != width) {
      reject("expected " + std::to_string(width) + " fields, got " + std::to_string(row.size()));
      continue;
    }
    if (row[c_user].empty()) {
      reject("missing user id");
      continue;
    }
    if (row[c_route].empty()) {
      reject("missing route id");
      continue;
    }
    if (row[c_board_stop].empty() || row[c_alight_stop].empty()) {
      reject("missing stop id");
      continue;
    }
    auto const d = parse_date(row[c_date]);
    if (!d) {
      reject("invalid date");
      continue;
    }
    auto const board = csv::parse_int(row[c_board_time]);
    auto const alight = csv::parse_int(row[c_alight_time]);
    if (!board || !alight) {
      reject("invalid time");
      continue;
    }
    if (*board < 0 || *board >= kSecondsPerDay || *alight < 0) {
      reject("time out of range");
      continue;
    }
    if (*alight >= kSecondsPerDay) {
      reject("crosses midnight");
      continue;
    }
    if (*alight <= *board) {
      reject("non-positive duration");
      continue;
    }
    auto const blon = field_double(row, c_board_lon);
    auto const blat = field_double(row, c_board_lat);
    auto const alon = field_double(row, c_alight_lon);
    auto const alat = field_double(row, c_alight_lat);
    if (!blon || !blat || !alon || !alat || !std::isfinite(*blon) || !std::isfinite(*blat) ||
        !std::isfinite(*alon) || !std::isfinite(*alat)) {
      reject("invalid coordinate");
      continue;
    }
    if (options.bounds &&
        (!options.bounds->contains(*blon, *blat) || !options.bounds->contains(*alon, *alat))) {
      reject("coordinate outside bounding box");
      continue;
    }
    result.records.push_back(ride_record{.user_id = row[c_user],
                                         .service_date = *d,
                                         .route_id = row[c_route],
                                         .board_time = static_cast<seconds_t>(*board),
                                         .alight_time = static_cast<seconds_t>(*alight),
                                         .board_stop = row[c_board_stop],
                                         .alight_stop = row[c_alight_stop],
                                         .board_lon = *blon,
                                         .board_lat = *blat,
                                         .alight_lon = *alon,
                                         .alight_lat = *alat});
  }
  if (in.bad()) {
    throw data_error("rides: read error");
  }
  return result;
}

void write_rides(std::ostream& out, std::span<ride_record const> rides, char delimiter) {
  csv::write_row(out,
                 {"user_id", "date", "route", "board_time", "alight_time", "board_stop",
                  "alight_stop", "board_lon", "board_lat", "alight_lon", "alight_lat"},
                 delimiter);
  for (auto const& r : rides) {
    csv::write_row(out,
                   {r.user_id, format_date(r.service_date), r.route_id,
                    std::to_string(r.board_time), std::to_string(r.alight_time), r.board_stop,
                    r.alight_stop, csv::format_double(r.board_lon), csv::format_double(r.board_lat),
                    csv::format_double(r.alight_lon), csv::format_double(r.alight_lat)},
                   delimiter);
  }
}

void write_rejections(std::ostream& out, std::span<rejection const> rejections) {
  csv::write_row(out, {"row", "reason"});
  for (auto const& r : rejections) {
    csv::write_row(out, {std::to_string(r.row), r.reason});
  }
}

void sort_rides(std::vector<ride_record>& rides) {
  std::stable_sort(begin(rides), end(rides), [](ride_record const& a, ride_record const& b) {
    return std::tie(a.user_id, a.service_date, a.board_time, a.alight_time) <
           std::tie(b.user_id, b.service_date, b.board_time, b.alight_time);
  });
}

std::vector<trip> merge_transfers(std::span<ride_record const> rides, seconds_t threshold,
                                  unsigned threads) {
  // Group boundaries, and a contiguity check: a (user, date) key seen twice
  // with other groups in between means the caller did not group its input.
  std::vector<std::size_t> starts;
  {
    std::unordered_set<std::pair<std::string_view, int>, group_key_hash> seen;
    for (std::size_t i = 0; i < rides.size(); ++i) {
      if (i == 0 || !same_group(rides[i], rides[i - 1])) {
        auto const key = std::pair<std::string_view, int>{rides[i].user_id,
                                                          day_number(rides[i].service_date)};
        if (!seen.insert(key).second) {
          throw std::invalid_argument("merge_transfers: rides of user '" + rides[i].user_id +
                                      "' on " + format_date(rides[i].service_date) +
                                      " are not contiguous");
        }
        starts.push_back(i);
      }
    }
    starts.push_back(rides.size());
  }
  auto const n_groups = starts.size() - 1;

  auto const chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, n_groups));
  std::vector<std::vector<trip>> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    auto const g_begin = n_groups * c / chunks;
    auto const g_end = n_groups * (c + 1) / chunks;
    for (auto g = g_begin; g < g_end; ++g) {
      merge_group(rides.subspan(starts[g], starts[g + 1] - starts[g]), threshold, partial[c]);
    }
  });

  std::vector<trip> trips;
  trips.reserve(std::accumulate(begin(partial), end(partial), std::size_t{0},
                                [](std::size_t acc, auto const& p) { return acc + p.size(); }));
  for (auto& p : partial) {
    std::move(begin(p), end(p), std::back_inserter(trips));
  }
  auto const canonical = [](trip const& a, trip const& b) {
    return std::tuple{std::string_view{a.user_id}, a.service_date, a.dep_time()} <
           std::tuple{std::string_view{b.user_id}, b.service_date, b.dep_time()};
  };
  if (!std::is_sorted(begin(trips), end(trips), canonical)) {
    std::stable_sort(begin(trips), end(trips), canonical);
  }
  return trips;
}

std::vector<ride_record> flatten(std::span<trip const> trips) {
  std::vector<ride_record> rides;
  for (auto const& t : trips) {
    rides.insert(end(rides), begin(t.legs), end(t.legs));
  }
  return rides;
}

// ---------------------------------------------------------------------------

poi_table parse_poi(std::istream& in, char delimiter) {
  if (!in) {
    throw data_error("poi: unreadable source");
  }
  csv::reader reader{in, delimiter};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("poi: missing header row");
  }
  auto const hdr = csv::header{row};
  auto const c_stop = hdr.require("stop_id");
  std::array<std::size_t, kNumPoiCategories> cols{};
  for (std::size_t k = 0; k < kNumPoiCategories; ++k) {
    cols[k] = hdr.require(kPoiCategoryNames[k]);
  }

  poi_table table;
  while (reader.next(row)) {
    auto const where = "poi row " + std::to_string(reader.record_number());
    if (row.size() == 1 && row[0].empty()) {
      continue;
    }
    if (row.size() != hdr.names().size()) {
      throw data_error(where + ": wrong field count");
    }
    station_poi_profile profile{.stop_id = row[c_stop], .proportions = {}};
    if (profile.stop_id.empty()) {
      throw data_error(where + ": missing stop id");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumPoiCategories; ++k) {
      auto const v = csv::parse_double(row[cols[k]]);
      if (!v || !(*v >= 0.0 && *v <= 1.0)) {
        throw data_error(where + ": proportion '" + std::string{kPoiCategoryNames[k]} +
                         "' not in [0,1]");
      }
      profile.proportions[k] = *v;
      sum += *v;
    }
    if (sum > 1.0 + 1e-9) {
      throw data_error(where + ": proportions sum to more than 1");
    }
    if (!table.emplace(profile.stop_id, profile).second) {
      throw data_error(where + ": duplicate stop id '" + profile.stop_id + "'");
    }
  }
  return table;
}

void write_poi(std::ostream& out, std::span<station_poi_profile const> profiles) {
  std::vector<std::string> hdr{"stop_id"};
  hdr.insert(end(hdr), begin(kPoiCategoryNames), end(kPoiCategoryNames));
  csv::write_row(out, hdr);
  for (auto const& p : profiles) {
    std::vector<std::string> row{p.stop_id};
    for (auto const v : p.proportions) {
      row.push_back(csv::format_double(v));
    }
    csv::write_row(out, row);
  }
}

// ---------------------------------------------------------------------------

grid_spec grid_spec::from_bbox(bbox const& box, double cell_km) {
  if (!(cell_km > 0.0) || !(box.max_lon > box.min_lon) || !(box.max_lat > box.min_lat)) {
    throw usage_error("grid: empty bounding box or non-positive cell size");
  }
  auto const mid_lat = 0.5 * (box.min_lat + box.max_lat) * std::numbers::pi / 180.0;
  grid_spec spec;
  spec.min_lon = box.min_lon;
  spec.min_lat = box.min_lat;
  spec.lat_step = cell_km / kKmPerDegreeLat;
  spec.lon_step = cell_km / (kKmPerDegreeLonEquator * std::cos(mid_lat));
  spec.nx = static_cast<int>(std::llround((box.max_lon - box.min_lon) / spec.lon_step));
  spec.ny = static_cast<int>(std::llround((box.max_lat - box.min_lat) / spec.lat_step));
  if (spec.nx < 1 || spec.ny < 1) {
    throw usage_error("grid: bounding box smaller than one cell");
  }
  return spec;
}

bbox grid_spec::bounds() const {
  return bbox{min_lon, min_lat, min_lon + nx * lon_step, min_lat + ny * lat_step};
}

std::vector<raster_value> parse_raster(std::istream& in, char delimiter) {
  if (!in) {
    throw data_error("raster: unreadable source");
  }
  csv::reader reader{in, delimiter};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("raster: missing header row");
  }
  auto const hdr = csv::header{row};
  auto const c_x = hdr.require("x_index");
  auto const c_y = hdr.require("y_index");
  auto const c_v = hdr.require("value");
  std::vector<raster_value> values;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) {
      continue;
    }
    if (row.size() != hdr.names().size()) {
      throw data_error("raster row " + std::to_string(reader.record_number()) + ": wrong field count");
    }
    auto const x = csv::parse_int(row[c_x]);
    auto const y = csv::parse_int(row[c_y]);
    auto const v = csv::parse_double(row[c_v]).value_or(std::nan(""));
    if (!x || !y || !std::isfinite(v)) {
      throw data_error("raster row " + std::to_string(reader.record_number()) + ": malformed");
    }
    values.push_back(raster_value{static_cast<int>(*x), static_cast<int>(*y), v});
  }
  return values;
}

void write_raster(std::ostream& out, std::span<raster_value const> values) {
  csv::write_row(out, {"x_index", "y_index", "value"});
  for (auto const& v : values) {
    csv::write_row(out, {std::to_string(v.x_index), std::to_string(v.y_index),
                         csv::format_double(v.value)});
  }
}

grid::grid(grid_spec spec, std::vector<grid_cell> cells)
    : spec_{spec}, cells_{std::move(cells)} {}

grid load_grid(grid_spec const& spec, std::span<raster_value const> population,
               std::span<raster_value const> land_price) {
  auto const n = static_cast<std::size_t>(spec.nx) * static_cast<std::size_t>(spec.ny);
  std::vector<grid_cell> cells(n);
  std::vector<std::uint8_t> have(n, 0);

  auto const fill = [&](std::span<raster_value const> raster, std::string_view name,
                        std::uint8_t bit, auto&& assign) {
    for (auto const& v : raster) {
      if (v.x_index < 0 || v.x_index >= spec.nx || v.y_index < 0 || v.y_index >= spec.ny) {
        continue;  // rasters may extend past the box
      }
      if (v.value < 0.0) {
        throw data_error(std::string{name} + " raster: negative value at cell (" +
                         std::to_string(v.x_index) + "," + std::to_string(v.y_index) + ")");
      }
      auto const id = static_cast<std::size_t>(spec.cell_id(v.x_index, v.y_index));
      if (have[id] & bit) {
        throw data_error(std::string{name} + " raster: duplicate cell (" +
                         std::to_string(v.x_index) + "," + std::to_string(v.y_index) + ")");
      }
      have[id] |= bit;
      assign(cells[id], v.value);
    }
  };
  fill(population, "population", 1U, [](grid_cell& c, double v) { c.population_density = v; });
  fill(land_price, "land price", 2U, [](grid_cell& c, double v) { c.land_price = v; });

  std::ostringstream missing;
  std::size_t n_missing = 0;
  for (int y = 0; y < spec.ny; ++y) {
    for (int x = 0; x < spec.nx; ++x) {
      auto const id = static_cast<std::size_t>(spec.cell_id(x, y));
      cells[id].cell_id = static_cast<int>(id);
      cells[id].x_index = x;
      cells[id].y_index = y;
      if (have[id] != 3U) {
        if (n_missing < 20) {
          missing << (n_missing == 0 ? "" : " ") << '(' << x << ',' << y << ')';
        }
        ++n_missing;
      }
    }
  }
  if (n_missing != 0) {
    throw data_error("grid coverage hole: " + std::to_string(n_missing) +
                     " cells missing a raster value: " + missing.str() +
                     (n_missing > 20 ? " ..." : ""));
  }
  return grid{spec, std::move(cells)};
}

grid_cell const& locate(double lon, double lat, grid const& g) {
  auto const& s = g.spec();
  auto const fx = std::floor((lon - s.min_lon) / s.lon_step);
  auto const fy = std::floor((lat - s.min_lat) / s.lat_step);
  if (!(fx >= 0.0 && fx < s.nx && fy >= 0.0 && fy < s.ny)) {
    throw data_error("point (" + csv::format_double(lon) + "," + csv::format_double(lat) +
                     ") outside grid");
  }
  return g.at(static_cast<int>(fx), static_cast<int>(fy));
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 23> kSurveyColumns{
    "person_id",  "trip_seq",   "date",         "gender",       "age_band",   "income_band",
    "job_status", "car_owner",  "home_stop",    "home_lon",     "home_lat",   "work_stop",
    "work_lon",   "work_lat",   "dep_time",     "arr_time",     "origin_stop", "origin_lon",
    "origin_lat", "dest_stop",  "dest_lon",     "dest_lat",     "purpose"};

}  // namespace

std::vector<survey_person> parse_survey(std::istream& in, char delimiter) {
  if (!in) {
    throw data_error("survey: unreadable source");
  }
  csv::reader reader{in, delimiter};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("survey: missing header row");
  }
  auto const hdr = csv::header{row};
  std::array<std::size_t, kSurveyColumns.size()> col{};
  for (std::size_t i = 0; i < kSurveyColumns.size(); ++i) {
    col[i] = hdr.require(kSurveyColumns[i]);
  }
  auto const get = [&](std::size_t i) -> std::string const& { return row[col[i]]; };

  std::vector<survey_person> people;
  std::unordered_set<std::string> finished;
  while (reader.next(row)) {
    auto const where = "survey row " + std::to_string(reader.record_number());
    try {
      if (row.size() == 1 && row[0].empty()) {
        continue;
      }
      if (row.size() != hdr.names().size()) {
        throw data_error("wrong field count");
      }
      survey_person p;
      p.person_id = get(0);
      if (p.person_id.empty()) {
        throw data_error("missing person id");
      }
      auto const seq = csv::parse_int(get(1));
      auto const d = parse_date(get(2));
      if (!seq || !d) {
        throw data_error("invalid trip_seq or date");
      }
      p.survey_date = *d;
      p.sex = parse_enum_or_throw<gender>(get(3), kGenderNames, "gender");
      p.age = parse_enum_or_throw<age_band>(get(4), kAgeNames, "age band");
      p.income = parse_enum_or_throw<income_band>(get(5), kIncomeNames, "income band");
      p.job = parse_enum_or_throw<job_status>(get(6), kJobNames, "job status");
      if (get(7) != "Yes" && get(7) != "No") {
        throw data_error("car_owner must be Yes or No");
      }
      p.car_owner = get(7) == "Yes";
      p.home = read_location(row, col[8], col[9], col[10], "home");
      if (!get(11).empty()) {
        p.work = read_location(row, col[11], col[12], col[13], "work");
      }

      survey_trip t;
      t.trip_seq = static_cast<int>(*seq);
      auto const dep = csv::parse_int(get(14));
      auto const arr = csv::parse_int(get(15));
      if (!dep || !arr || *dep < 0 || *arr >= kSecondsPerDay || *arr <= *dep) {
        throw data_error("invalid trip times");
      }
      t.dep_time = static_cast<seconds_t>(*dep);
      t.arr_time = static_cast<seconds_t>(*arr);
      t.origin = read_location(row, col[16], col[17], col[18], "origin");
      t.dest = read_location(row, col[19], col[20], col[21], "destination");
      t.trip_purpose = parse_enum_or_throw<purpose>(get(22), kPurposeNames, "purpose");

      if (people.empty() || people.back().person_id != p.person_id) {
        if (!people.empty()) {
          finished.insert(people.back().person_id);
        }
        if (finished.contains(p.person_id)) {
          throw data_error("rows of person '" + p.person_id + "' are not contiguous");
        }
        people.push_back(std::move(p));
      } else {
        auto const& prev = people.back();
        if (prev.survey_date != p.survey_date || prev.age != p.age || prev.job != p.job ||
            prev.income != p.income || prev.sex != p.sex || prev.home != p.home ||
            prev.work != p.work || prev.car_owner != p.car_owner) {
          throw data_error("person fields differ between rows of '" + p.person_id + "'");
        }
        auto const& last = prev.trips.back();
        if (t.trip_seq <= last.trip_seq || t.dep_time < last.dep_time) {
          throw data_error("trips of '" + p.person_id + "' are not chronologically ordered");
        }
      }
      people.back().trips.push_back(std::move(t));
    } catch (data_error const& e) {
      throw data_error(where + ": " + e.what());
    }
  }
  return people;
}

void write_survey(std::ostream& out, std::span<survey_person const> people) {
  csv::write_row(out, std::vector<std::string>(begin(kSurveyColumns), end(kSurveyColumns)));
  for (auto const& p : people) {
    for (auto const& t : p.trips) {
      csv::write_row(
          out, {p.person_id,
                std::to_string(t.trip_seq),
                format_date(p.survey_date),
                std::string{enum_name(p.sex, kGenderNames)},
                std::string{to_string(p.age)},
                std::string{to_string(p.income)},
                std::string{to_string(p.job)},
                p.car_owner ? "Yes" : "No",
                p.home.stop_id,
                csv::format_double(p.home.lon),
                csv::format_double(p.home.lat),
                p.work ? p.work->stop_id : "",
                p.work ? csv::format_double(p.work->lon) : "",
                p.work ? csv::format_double(p.work->lat) : "",
                std::to_string(t.dep_time),
                std::to_string(t.arr_time),
                t.origin.stop_id,
                csv::format_double(t.origin.lon),
                csv::format_double(t.origin.lat),
                t.dest.stop_id,
                csv::format_double(t.dest.lon),
                csv::format_double(t.dest.lat),
                std::string{to_string(t.trip_purpose)}});
    }
  }
}

std::vector<trip> to_trips(survey_person const& person) {
  std::vector<trip> trips;
  trips.reserve(person.trips.size());
  for (auto const& t : person.trips) {
    trips.push_back(trip{.user_id = person.person_id,
                         .service_date = person.survey_date,
                         .legs = {ride_record{.user_id = person.person_id,
                                              .service_date = person.survey_date,
                                              .route_id = "survey",
                                              .board_time = t.dep_time,
                                              .alight_time = t.arr_time,
                                              .board_stop = t.origin.stop_id,
                                              .alight_stop = t.dest.stop_id,
                                              .board_lon = t.origin.lon,
                                              .board_lat = t.origin.lat,
                                              .alight_lon = t.dest.lon,
                                              .alight_lat = t.dest.lat}},
                         .trip_purpose = t.trip_purpose,
                         .source = label_source::survey});
  }
  return trips;
}

}  // namespace tripinfer::ingest

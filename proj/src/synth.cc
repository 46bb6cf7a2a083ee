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

#include "tripinfer/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>

#include "tripinfer/config.h"
#include "tripinfer/csv.h"
#include "tripinfer/parallel.h"
#include "tripinfer/random.h"

namespace tripinfer::synth {

namespace {

constexpr double kKmPerDegreeLat = 110.574;
constexpr double kKmPerDegreeLonEquator = 111.320;

constexpr seconds_t hms(int h, int m) { return h * 3600 + m * 60; }

enum class role { residential, office, campus, hospital, commercial };

struct station {
  std::string id;
  double lon{}, lat{};
  role kind{};
  int x{}, y{};
};

// Mean POI mix per role in category order catering, education, leisure,
// shopping, hospital, company, residence.
constexpr std::array<std::array<double, 7>, 5> kRoleMix{{
    {0.10, 0.05, 0.04, 0.07, 0.02, 0.07, 0.55},
    {0.15, 0.02, 0.04, 0.07, 0.02, 0.52, 0.10},
    {0.10, 0.50, 0.06, 0.05, 0.02, 0.05, 0.12},
    {0.08, 0.02, 0.02, 0.05, 0.50, 0.08, 0.15},
    {0.24, 0.02, 0.20, 0.34, 0.02, 0.06, 0.06},
}};

struct city {
  ingest::grid_spec spec;
  std::vector<station> stations;
  std::vector<double> cell_price;
  std::vector<double> cell_density;
  std::vector<int> residential_by_price;  // residential stations, cheapest first
  std::vector<int> offices, campuses, hospitals, commercials;
};

double km_between(station const& a, station const& b) {
  auto const mid = 0.5 * (a.lat + b.lat) * std::numbers::pi / 180.0;
  auto const dx = (a.lon - b.lon) * kKmPerDegreeLonEquator * std::cos(mid);
  auto const dy = (a.lat - b.lat) * kKmPerDegreeLat;
  return std::hypot(dx, dy);
}

double truncated_normal(rng& r, double mean, double sd, double lo, double hi) {
  for (int i = 0; i < 64; ++i) {
    auto const v = r.normal(mean, sd);
    if (v >= lo && v <= hi) {
      return v;
    }
  }
  return std::clamp(mean, lo, hi);
}

std::size_t draw(std::span<double const> marginal, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < marginal.size(); ++i) {
    acc += marginal[i];
    if (u < acc) {
      return i;
    }
  }
  return marginal.size() - 1;
}

city build_city(config const& cfg) {
  rng r{derive_seed(cfg.seed, 1)};
  city c;
  c.spec = ingest::grid_spec::from_bbox(cfg.bounds(), cfg.cell_km);
  auto const nx = c.spec.nx;
  auto const ny = c.spec.ny;
  auto const cx = 0.5 * (nx - 1);
  auto const cy = 0.5 * (ny - 1);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      // Prices rise towards the north-east; density peaks in the centre.
      auto const t = static_cast<double>(x + y) / static_cast<double>(std::max(1, nx + ny - 2));
      c.cell_price.push_back(std::round(15000.0 + 45000.0 * t + r.uniform(-3000.0, 3000.0)));
      auto const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      auto const scale = 0.3 * std::max(nx, ny);
      c.cell_density.push_back(
          std::round(1500.0 + 20000.0 * std::exp(-d2 / (2.0 * scale * scale)) + r.uniform(0.0, 800.0)));
    }
  }

  // Stations at uniform positions, kept away from cell borders.
  for (int i = 0; i < cfg.stations; ++i) {
    station s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%04d", i + 1);
    s.id = buf;
    s.x = static_cast<int>(r.below(static_cast<std::uint64_t>(nx)));
    s.y = static_cast<int>(r.below(static_cast<std::uint64_t>(ny)));
    s.lon = c.spec.min_lon + (s.x + r.uniform(0.1, 0.9)) * c.spec.lon_step;
    s.lat = c.spec.min_lat + (s.y + r.uniform(0.1, 0.9)) * c.spec.lat_step;
    c.stations.push_back(std::move(s));
  }

  // Offices cluster near the centre; the other special roles are scattered.
  std::vector<int> order(c.stations.size());
  std::iota(begin(order), end(order), 0);
  std::vector<double> key(c.stations.size());
  for (std::size_t i = 0; i < c.stations.size(); ++i) {
    auto const& s = c.stations[i];
    key[i] = std::hypot(s.x - cx, s.y - cy) + r.uniform(0.0, 3.0);
  }
  std::stable_sort(begin(order), end(order), [&](int a, int b) { return key[a] < key[b]; });
  for (int k = 0; k < cfg.office_stations; ++k) {
    c.stations[static_cast<std::size_t>(order[k])].kind = role::office;
    c.offices.push_back(order[k]);
  }
  std::vector<int> rest(order.begin() + cfg.office_stations, order.end());
  std::sort(begin(rest), end(rest));
  r.shuffle(std::span<int>{rest});
  std::size_t next = 0;
  auto const take = [&](int count, role kind, std::vector<int>& into) {
    for (int k = 0; k < count; ++k) {
      auto const id = rest[next++];
      c.stations[static_cast<std::size_t>(id)].kind = kind;
      into.push_back(id);
    }
  };
  take(cfg.campus_stations, role::campus, c.campuses);
  take(cfg.hospital_stations, role::hospital, c.hospitals);
  take(cfg.commercial_stations, role::commercial, c.commercials);
  for (auto* v : {&c.offices, &c.campuses, &c.hospitals, &c.commercials}) {
    std::sort(begin(*v), end(*v));
  }
  for (std::size_t i = 0; i < c.stations.size(); ++i) {
    if (c.stations[i].kind == role::residential) {
      c.residential_by_price.push_back(static_cast<int>(i));
    }
  }
  auto const price_of = [&](int i) {
    auto const& s = c.stations[static_cast<std::size_t>(i)];
    return c.cell_price[static_cast<std::size_t>(c.spec.cell_id(s.x, s.y))];
  };
  std::stable_sort(begin(c.residential_by_price), end(c.residential_by_price),
                   [&](int a, int b) { return price_of(a) < price_of(b); });
  return c;
}

std::vector<ingest::station_poi_profile> make_poi(city const& c, config const& cfg) {
  rng r{derive_seed(cfg.seed, 2)};
  std::vector<ingest::station_poi_profile> out;
  for (auto const& s : c.stations) {
    ingest::station_poi_profile p;
    p.stop_id = s.id;
    double sum = 0.0;
    for (std::size_t k = 0; k < ingest::kNumPoiCategories; ++k) {
      auto const v = kRoleMix[static_cast<std::size_t>(s.kind)][k] * r.uniform(0.7, 1.3);
      p.proportions[k] = v;
      sum += v;
    }
    if (sum > 0.98) {
      for (auto& v : p.proportions) {
        v *= 0.98 / sum;
      }
    }
    for (auto& v : p.proportions) {
      v = std::round(v * 1e4) / 1e4;
    }
    if (!r.bernoulli(cfg.missing_poi_rate)) {
      out.push_back(std::move(p));
    }
  }
  return out;
}

struct agent {
  std::string id;
  ingest::gender sex{};
  age_band age{};
  job_status job{};
  income_band income{};
  bool car{};
  int home{};
  std::optional<int> work;
  std::vector<int> alt_homes;
  std::vector<int> favourites;  // preferred shopping/leisure stops
  double morning{};             // habitual departure times, seconds
  double evening{};
};

agent make_agent(city const& c, config const& cfg, rng& r, std::string id) {
  agent a;
  a.id = std::move(id);
  a.sex = r.bernoulli(cfg.female_share) ? ingest::gender::female : ingest::gender::male;
  a.car = r.bernoulli(cfg.car_share);

  // Shared latent order: student < worker < retired and young < adult < old.
  constexpr std::array<job_status, 3> kJobOrder{job_status::student, job_status::with_job,
                                                job_status::retired_no_job};
  std::array<double, 3> const job_ordered{cfg.job[1], cfg.job[0], cfg.job[2]};
  auto const u = r.uniform();
  a.job = kJobOrder[draw(job_ordered, u)];
  auto const ua = r.bernoulli(cfg.coupling) ? u : r.uniform();
  a.age = static_cast<age_band>(draw(cfg.age, ua));
  a.income = static_cast<income_band>(draw(cfg.income, r.uniform()));

  // Home price follows income: the band's share of the price-ranked
  // residential stations, with some households anywhere.
  auto const& res = c.residential_by_price;
  auto const n = res.size();
  if (r.bernoulli(0.8)) {
    double lo = 0.0;
    for (std::size_t b = 0; b < static_cast<std::size_t>(a.income); ++b) {
      lo += cfg.income[b];
    }
    auto const hi = lo + cfg.income[static_cast<std::size_t>(a.income)];
    auto const first = std::min(n - 1, static_cast<std::size_t>(lo * static_cast<double>(n)));
    auto const last = std::max(first + 1, std::min(n, static_cast<std::size_t>(hi * static_cast<double>(n))));
    a.home = res[first + r.below(last - first)];
  } else {
    a.home = res[r.below(n)];
  }

  // Nearby residential stops used on some mornings.
  std::vector<std::pair<double, int>> near;
  for (auto const i : res) {
    if (i != a.home) {
      near.emplace_back(km_between(c.stations[static_cast<std::size_t>(a.home)],
                                   c.stations[static_cast<std::size_t>(i)]),
                        i);
    }
  }
  std::sort(begin(near), end(near));
  for (std::size_t k = 0; k < std::min<std::size_t>(3, near.size()); ++k) {
    a.alt_homes.push_back(near[k].second);
  }

  for (int k = 0; k < 4; ++k) {
    a.favourites.push_back(c.commercials[r.below(c.commercials.size())]);
  }

  switch (a.job) {
    case job_status::with_job:
      a.work = c.offices[r.below(c.offices.size())];
      a.morning = truncated_normal(r, hms(8, 0), 40 * 60, hms(6, 0), hms(10, 30));
      a.evening = truncated_normal(r, hms(18, 15), 45 * 60, hms(16, 0), hms(21, 0));
      break;
    case job_status::student:
      a.work = c.campuses[r.below(c.campuses.size())];
      a.morning = truncated_normal(r, hms(7, 0), 15 * 60, hms(6, 15), hms(7, 45));
      a.evening = truncated_normal(r, hms(16, 45), 25 * 60, hms(15, 30), hms(18, 0));
      break;
    case job_status::retired_no_job:
      a.morning = truncated_normal(r, hms(9, 30), 75 * 60, hms(7, 0), hms(14, 0));
      break;
  }
  return a;
}

struct planned_trip {
  std::vector<ingest::ride_record> legs;
  purpose trip_purpose{};
  int from{};
  int to{};
};

class day_builder {
public:
  day_builder(city const& c, config const& cfg, rng& r, std::string const& user, ingest::date d)
      : c_{c}, cfg_{cfg}, r_{r}, user_{user}, date_{d} {}

  // Realises a trip departing at `dep`; returns its arrival time.
  seconds_t add(int from, int to, seconds_t dep, purpose p) {
    auto const& a = c_.stations[static_cast<std::size_t>(from)];
    auto const& b = c_.stations[static_cast<std::size_t>(to)];
    auto const total = static_cast<seconds_t>(
        std::max(240.0, std::round(300.0 + 150.0 * km_between(a, b) + r_.normal(0.0, 120.0))));
    planned_trip t;
    t.trip_purpose = p;
    t.from = from;
    t.to = to;
    if (r_.bernoulli(cfg_.transfer_rate)) {
      auto mid = from;
      while (mid == from || mid == to) {
        mid = static_cast<int>(r_.below(c_.stations.size()));
      }
      auto const first = std::max<seconds_t>(120, static_cast<seconds_t>(std::round(total * r_.uniform(0.35, 0.65))));
      auto const wait = static_cast<seconds_t>(std::round(r_.uniform(180.0, 900.0)));
      auto const second = std::max<seconds_t>(120, total - first);
      t.legs.push_back(leg(from, mid, dep, dep + first));
      t.legs.push_back(leg(mid, to, dep + first + wait, dep + first + wait + second));
    } else {
      t.legs.push_back(leg(from, to, dep, dep + total));
    }
    auto const arrival = t.legs.back().alight_time;
    trips_.push_back(std::move(t));
    return arrival;
  }

  std::vector<planned_trip> take() { return std::move(trips_); }

private:
  ingest::ride_record leg(int from, int to, seconds_t board, seconds_t alight) {
    auto const& a = c_.stations[static_cast<std::size_t>(from)];
    auto const& b = c_.stations[static_cast<std::size_t>(to)];
    char route[16];
    std::snprintf(route, sizeof(route), "R%03d", static_cast<int>(r_.below(200)) + 1);
    return ingest::ride_record{user_,  date_,  route, board, alight, a.id,
                               b.id,   a.lon,  a.lat, b.lon, b.lat};
  }

  city const& c_;
  config const& cfg_;
  rng& r_;
  std::string const& user_;
  ingest::date date_;
  std::vector<planned_trip> trips_;
};

// Shortest gap kept between consecutive trips so that transfer merging
// recovers exactly the planned trips.
constexpr seconds_t kMinDwell = 5400;

std::vector<planned_trip> plan_day(city const& c, config const& cfg, agent const& a, rng& r,
                                   ingest::date d, double shift) {
  day_builder b{c, cfg, r, a.id, d};
  auto const jitter = cfg.jitter_minutes * 60.0;
  if (a.work) {
    auto const origin =
        r.bernoulli(cfg.alt_home_rate) && !a.alt_homes.empty() ? a.alt_homes[r.below(a.alt_homes.size())] : a.home;
    auto const dep = static_cast<seconds_t>(std::round(
        std::clamp(a.morning + shift * 1200.0 + r.normal(0.0, jitter), double{hms(5, 30)}, double{hms(11, 0)})));
    auto const arrive = b.add(origin, *a.work, dep, purpose::work);
    auto const evening = static_cast<seconds_t>(std::round(std::clamp(
        a.evening + shift * 2700.0 + r.normal(0.0, jitter), double{hms(15, 10)}, double{hms(21, 30)})));
    auto const leave = std::max(evening, arrive + kMinDwell);
    auto const detour = r.bernoulli(std::min(1.0, cfg.detour_rate * (1.0 + 2.0 * shift)));
    if (detour && leave < hms(19, 0)) {
      auto const stop = a.favourites[r.below(a.favourites.size())];
      auto const there = b.add(*a.work, stop, leave, purpose::shopping_entertainment);
      auto const dwell = static_cast<seconds_t>(
          std::round(truncated_normal(r, 7200.0, 1800.0, kMinDwell, 10800.0)));
      b.add(stop, a.home, std::max(there + kMinDwell, std::min(there + dwell, hms(22, 0))),
            purpose::home);
    } else {
      b.add(*a.work, a.home, leave, purpose::home);
    }
  } else {
    auto const dep = static_cast<seconds_t>(std::round(
        std::clamp(a.morning + shift * 3600.0 + r.normal(0.0, jitter), double{hms(6, 30)}, double{hms(15, 0)})));
    auto const medical = r.bernoulli(cfg.medical_share);
    int dest = 0;
    if (medical) {
      dest = c.hospitals[r.below(c.hospitals.size())];
    } else if (r.bernoulli(0.7)) {
      dest = a.favourites[r.below(a.favourites.size())];
    } else {
      dest = c.commercials[r.below(c.commercials.size())];
    }
    auto const there =
        b.add(a.home, dest, dep, medical ? purpose::medical : purpose::shopping_entertainment);
    auto const dwell = static_cast<seconds_t>(
        std::round(truncated_normal(r, 9000.0, 2700.0, kMinDwell, 18000.0)));
    b.add(dest, a.home, there + dwell, purpose::home);
  }
  return b.take();
}

ingest::location location_of(city const& c, int i) {
  auto const& s = c.stations[static_cast<std::size_t>(i)];
  return ingest::location{s.id, s.lon, s.lat};
}

ingest::date parse_config_date(std::string const& s, char const* what) {
  auto const d = ingest::parse_date(s);
  if (!d) {
    throw usage_error(std::string{"synth: invalid "} + what + " '" + s + "'");
  }
  return *d;
}

std::string user_id(char prefix, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%c%06zu", prefix, i + 1);
  return buf;
}

}  // namespace

void config::validate() const {
  auto const fail = [](std::string const& what) { throw usage_error("synth: " + what); };
  if (nx < 1 || ny < 1 || !(cell_km > 0.0)) fail("grid dimensions must be positive");
  if (office_stations < 1 || campus_stations < 1 || hospital_stations < 1 || commercial_stations < 1) {
    fail("every station role needs at least one station");
  }
  if (office_stations + campus_stations + hospital_stations + commercial_stations + 4 > stations) {
    fail("more anchor stations requested than stations available");
  }
  if (card_days < 1) fail("card_days must be >= 1");
  auto const check_marginal = [&](std::span<double const> m, char const* name) {
    double sum = 0.0;
    for (auto const v : m) {
      if (!(v >= 0.0)) fail(std::string{name} + " marginal has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail(std::string{name} + " marginal must sum to 1");
  };
  check_marginal(age, "age");
  check_marginal(job, "job");
  check_marginal(income, "income");
  for (auto const& [v, name] : {std::pair{female_share, "female_share"}, {car_share, "car_share"},
                                {coupling, "coupling"}, {detour_rate, "detour_rate"},
                                {medical_share, "medical_share"}, {transfer_rate, "transfer_rate"},
                                {alt_home_rate, "alt_home_rate"}, {missing_poi_rate, "missing_poi_rate"},
                                {shift, "shift"}}) {
    if (!(v >= 0.0 && v <= 1.0)) fail(std::string{name} + " must lie in [0, 1]");
  }
  if (!(jitter_minutes >= 0.0)) fail("jitter_minutes must be >= 0");
  parse_config_date(survey_date, "survey_date");
  parse_config_date(card_start, "card_start");
}

ingest::bbox config::bounds() const {
  auto const lat_step = cell_km / kKmPerDegreeLat;
  auto const max_lat = origin_lat + ny * lat_step;
  auto const mid = 0.5 * (origin_lat + max_lat) * std::numbers::pi / 180.0;
  auto const lon_step = cell_km / (kKmPerDegreeLonEquator * std::cos(mid));
  return ingest::bbox{origin_lon, origin_lat, origin_lon + nx * lon_step, max_lat};
}

dataset generate(config const& cfg, unsigned threads) {
  cfg.validate();
  auto const c = build_city(cfg);
  dataset d;
  d.poi = make_poi(c, cfg);
  for (int y = 0; y < c.spec.ny; ++y) {
    for (int x = 0; x < c.spec.nx; ++x) {
      auto const id = static_cast<std::size_t>(c.spec.cell_id(x, y));
      d.population.push_back({x, y, c.cell_density[id]});
      d.land_price.push_back({x, y, c.cell_price[id]});
    }
  }

  auto const survey_day = parse_config_date(cfg.survey_date, "survey_date");
  auto const card_start = std::chrono::sys_days{parse_config_date(cfg.card_start, "card_start")};

  d.survey.resize(cfg.survey_users);
  parallel_for(cfg.survey_users, threads, [&](std::size_t i) {
    rng r{derive_seed(cfg.seed, 1000 + 2 * i)};
    auto const a = make_agent(c, cfg, r, user_id('P', i));
    auto& p = d.survey[i];
    p.person_id = a.id;
    p.survey_date = survey_day;
    p.sex = a.sex;
    p.age = a.age;
    p.income = a.income;
    p.job = a.job;
    p.car_owner = a.car;
    p.home = location_of(c, a.home);
    if (a.work) {
      p.work = location_of(c, *a.work);
    }
    int seq = 0;
    for (auto const& t : plan_day(c, cfg, a, r, survey_day, 0.0)) {
      p.trips.push_back(ingest::survey_trip{++seq, t.legs.front().board_time,
                                            t.legs.back().alight_time, location_of(c, t.from),
                                            location_of(c, t.to), t.trip_purpose});
    }
  });

  struct card_output {
    agent_truth who;
    std::vector<ingest::ride_record> rides;
    std::vector<truth_trip> truth;
  };
  std::vector<card_output> cards(cfg.card_users);
  parallel_for(cfg.card_users, threads, [&](std::size_t i) {
    rng r{derive_seed(cfg.seed, 1001 + 2 * i)};
    auto const a = make_agent(c, cfg, r, user_id('U', i));
    auto& out = cards[i];
    out.who = agent_truth{a.id, a.age, a.job, a.income};
    for (int k = 0; k < cfg.card_days; ++k) {
      auto const day = ingest::date{card_start + std::chrono::days{k}};
      int seq = 0;
      for (auto& t : plan_day(c, cfg, a, r, day, cfg.shift)) {
        out.truth.push_back(truth_trip{a.id, day, ++seq, t.trip_purpose});
        for (auto& l : t.legs) {
          out.rides.push_back(std::move(l));
        }
      }
    }
  });
  for (auto& o : cards) {
    d.card_agents.push_back(std::move(o.who));
    d.rides.insert(end(d.rides), std::make_move_iterator(begin(o.rides)),
                   std::make_move_iterator(end(o.rides)));
    d.truth.insert(end(d.truth), begin(o.truth), end(o.truth));
  }
  ingest::sort_rides(d.rides);
  return d;
}

void write_truth(std::ostream& out, dataset const& d) {
  csv::write_row(out, {"user_id", "date", "trip_seq", "purpose", "age_band", "job_status", "income_band"});
  std::map<std::string_view, agent_truth const*> who;
  for (auto const& a : d.card_agents) {
    who.emplace(a.user_id, &a);
  }
  for (auto const& t : d.truth) {
    auto const& a = *who.at(t.user_id);
    csv::write_row(out, {t.user_id, ingest::format_date(t.service_date), std::to_string(t.trip_seq),
                         std::string{to_string(t.trip_purpose)}, std::string{to_string(a.age)},
                         std::string{to_string(a.job)}, std::string{to_string(a.income)}});
  }
}

truth_table parse_truth(std::istream& in) {
  if (!in) {
    throw data_error("truth: unreadable source");
  }
  csv::reader reader{in};
  std::vector<std::string> row;
  if (!reader.next(row)) {
    throw data_error("truth: missing header");
  }
  csv::header const hdr{row};
  auto const c_user = hdr.require("user_id");
  auto const c_date = hdr.require("date");
  auto const c_seq = hdr.require("trip_seq");
  auto const c_purpose = hdr.require("purpose");
  auto const c_age = hdr.require("age_band");
  auto const c_job = hdr.require("job_status");
  auto const c_income = hdr.require("income_band");
  truth_table t;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) {
      continue;
    }
    auto const where = "truth row " + std::to_string(reader.record_number());
    if (row.size() != hdr.names().size()) {
      throw data_error(where + ": expected " + std::to_string(hdr.names().size()) + " fields");
    }
    auto const seq = csv::parse_int(row[c_seq]);
    if (!seq || !ingest::parse_date(row[c_date])) {
      throw data_error(where + ": malformed date or trip_seq");
    }
    auto const key = std::tuple{row[c_user], row[c_date], static_cast<int>(*seq)};
    if (!t.trips.emplace(key, parse_enum_or_throw<purpose>(row[c_purpose], kPurposeNames, "purpose")).second) {
      throw data_error(where + ": duplicate trip");
    }
    agent_truth a{row[c_user], parse_enum_or_throw<age_band>(row[c_age], kAgeNames, "age band"),
                  parse_enum_or_throw<job_status>(row[c_job], kJobNames, "job status"),
                  parse_enum_or_throw<income_band>(row[c_income], kIncomeNames, "income band")};
    auto const [it, inserted] = t.agents.emplace(a.user_id, a);
    if (!inserted && (it->second.age != a.age || it->second.job != a.job || it->second.income != a.income)) {
      throw data_error(where + ": attributes differ between rows of one user");
    }
  }
  return t;
}

void write_dataset(dataset const& d, config const& cfg, std::filesystem::path const& dir) {
  std::filesystem::create_directories(dir);
  auto const open = [&](char const* name) {
    std::ofstream out{dir / name, std::ios::binary};
    if (!out) {
      throw data_error("cannot write " + (dir / name).string());
    }
    return out;
  };
  {
    auto out = open("survey.csv");
    ingest::write_survey(out, d.survey);
  }
  {
    auto out = open("rides.csv");
    ingest::write_rides(out, d.rides);
  }
  {
    auto out = open("poi.csv");
    ingest::write_poi(out, d.poi);
  }
  {
    auto out = open("population.csv");
    ingest::write_raster(out, d.population);
  }
  {
    auto out = open("land_price.csv");
    ingest::write_raster(out, d.land_price);
  }
  {
    auto out = open("truth.csv");
    write_truth(out, d);
  }
  {
    run_config rc;
    rc.box = cfg.bounds();
    rc.cell_km = cfg.cell_km;
    rc.seed = cfg.seed;
    rc.generator = cfg;
    auto out = open("fixture.cfg");
    out << to_ini(rc);
  }
}

namespace {

template <typename Enum>
std::vector<int> as_ints(std::vector<Enum> const& v) {
  std::vector<int> out;
  for (auto const e : v) {
    out.push_back(static_cast<int>(e));
  }
  return out;
}

template <std::size_t N>
std::vector<std::string> names_of(std::array<std::string_view, N> const& a) {
  return {a.begin(), a.end()};
}

}  // namespace

holdout_report holdout_truth(truth_table const& truth, predictions const& p) {
  holdout_report r;
  if (!p.trips.empty()) {
    if (p.trips.size() != truth.trips.size()) {
      throw data_error("holdout: " + std::to_string(p.trips.size()) + " predicted trips vs " +
                       std::to_string(truth.trips.size()) + " in truth");
    }
    std::vector<purpose> want;
    std::vector<purpose> got;
    for (auto const& [key, value] : p.trips) {
      auto const it = truth.trips.find(key);
      if (it == end(truth.trips)) {
        throw data_error("holdout: trip " + std::get<0>(key) + " " + std::get<1>(key) + " #" +
                         std::to_string(std::get<2>(key)) + " not in truth");
      }
      want.push_back(it->second);
      got.push_back(value);
    }
    r.purpose = metrics::evaluate(as_ints(want), as_ints(got), names_of(kPurposeNames));
  }
  if (!p.profiles.empty()) {
    if (p.profiles.size() != truth.agents.size()) {
      throw data_error("holdout: " + std::to_string(p.profiles.size()) + " profiles vs " +
                       std::to_string(truth.agents.size()) + " users in truth");
    }
    std::vector<int> ta, pa, tj, pj, ti, pi;
    for (auto const& [user, attrs] : p.profiles) {
      auto const it = truth.agents.find(user);
      if (it == end(truth.agents)) {
        throw data_error("holdout: user " + user + " not in truth");
      }
      ta.push_back(static_cast<int>(it->second.age));
      tj.push_back(static_cast<int>(it->second.job));
      ti.push_back(static_cast<int>(it->second.income));
      pa.push_back(static_cast<int>(std::get<0>(attrs)));
      pj.push_back(static_cast<int>(std::get<1>(attrs)));
      pi.push_back(static_cast<int>(std::get<2>(attrs)));
    }
    r.age = metrics::evaluate(ta, pa, names_of(kAgeNames));
    r.job = metrics::evaluate(tj, pj, names_of(kJobNames));
    r.income = metrics::evaluate(ti, pi, names_of(kIncomeNames));
  }
  return r;
}

labeled_set make_blobs(std::size_t n, std::size_t classes, std::size_t features, double spread,
                       std::uint64_t seed) {
  rng r{seed};
  matrix centres{classes, features};
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t f = 0; f < features; ++f) {
      centres(c, f) = r.uniform(-spread, spread);
    }
  }
  labeled_set s{matrix{n, features}, std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    auto const c = i % classes;
    s.y[i] = static_cast<int>(c);
    for (std::size_t f = 0; f < features; ++f) {
      s.x(i, f) = centres(c, f) + r.normal();
    }
  }
  return s;
}

}  // namespace tripinfer::synth

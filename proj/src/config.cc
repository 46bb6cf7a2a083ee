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

#include "tripinfer/config.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tripinfer/csv.h"
#include "tripinfer/parallel.h"

namespace tripinfer {

namespace {

struct binding {
  char const* section;
  char const* key;
  std::function<std::string()> get;
  std::function<void(std::string const&)> set;
};

[[noreturn]] void bad_value(char const* section, char const* key, std::string const& v) {
  throw usage_error(std::string{"config: ["} + section + "] " + key + " = '" + v + "' is malformed");
}

template <typename T>
binding number(char const* section, char const* key, T& field) {
  return {section, key,
          [&field] {
            if constexpr (std::is_floating_point_v<T>) {
              return csv::format_double(field);
            } else {
              return std::to_string(field);
            }
          },
          [&field, section, key](std::string const& v) {
            if constexpr (std::is_floating_point_v<T>) {
              auto const d = csv::parse_double(v);
              if (!d) bad_value(section, key, v);
              field = *d;
            } else {
              auto const i = csv::parse_int(v);
              if (!i || (std::is_unsigned_v<T> && *i < 0)) bad_value(section, key, v);
              field = static_cast<T>(*i);
            }
          }};
}

binding text(char const* section, char const* key, std::string& field) {
  return {section, key, [&field] { return field; }, [&field](std::string const& v) { field = v; }};
}

binding path(char const* section, char const* key, std::filesystem::path& field) {
  return {section, key, [&field] { return field.generic_string(); },
          [&field](std::string const& v) { field = v; }};
}

template <typename T>
binding list(char const* section, char const* key, T& field) {
  using value_type = typename T::value_type;
  return {section, key,
          [&field] {
            std::string s;
            for (auto const& v : field) {
              if (!s.empty()) s += ',';
              if constexpr (std::is_floating_point_v<value_type>) {
                s += csv::format_double(v);
              } else {
                s += std::to_string(v);
              }
            }
            return s;
          },
          [&field, section, key](std::string const& v) {
            std::vector<value_type> values;
            std::stringstream ss{v};
            std::string item;
            while (std::getline(ss, item, ',')) {
              item.erase(0, item.find_first_not_of(' '));
              item.erase(item.find_last_not_of(' ') + 1);
              if constexpr (std::is_floating_point_v<value_type>) {
                auto const d = csv::parse_double(item);
                if (!d) bad_value(section, key, v);
                values.push_back(*d);
              } else {
                auto const i = csv::parse_int(item);
                if (!i) bad_value(section, key, v);
                values.push_back(static_cast<value_type>(*i));
              }
            }
            if constexpr (requires { field.assign(values.begin(), values.end()); }) {
              field.assign(values.begin(), values.end());
            } else {
              if (values.size() != field.size()) bad_value(section, key, v);
              std::copy(values.begin(), values.end(), field.begin());
            }
          }};
}

std::vector<binding> bindings(run_config& c) {
  auto& s = c.generator;
  return {
      path("input", "survey", c.survey),
      path("input", "rides", c.rides),
      path("input", "poi", c.poi),
      path("input", "population", c.population),
      path("input", "land_price", c.land_price),
      path("input", "truth", c.truth),
      {"input", "delimiter", [&c] { return c.delimiter == '\t' ? std::string{"tab"} : std::string(1, c.delimiter); },
       [&c](std::string const& v) {
         if (v == "tab") {
           c.delimiter = '\t';
         } else if (v.size() == 1) {
           c.delimiter = v[0];
         } else {
           bad_value("input", "delimiter", v);
         }
       }},
      number("grid", "min_lon", c.box.min_lon),
      number("grid", "min_lat", c.box.min_lat),
      number("grid", "max_lon", c.box.max_lon),
      number("grid", "max_lat", c.box.max_lat),
      number("grid", "cell_km", c.cell_km),
      number("thresholds", "transfer", c.transfer),
      number("thresholds", "anchor_cutoff", c.anchor.cutoff),
      number("thresholds", "anchor_freq", c.anchor.threshold),
      number("thresholds", "anchor_min_days", c.anchor.min_days),
      number("thresholds", "tau", c.tau),
      number("thresholds", "tau_min", c.tau_min),
      number("thresholds", "max_trips", c.max_trips),
      number("train", "gamma", c.train.gamma),
      number("train", "lambda", c.train.lambda),
      number("train", "eta", c.train.eta),
      number("train", "max_depth", c.train.max_depth),
      number("train", "rounds", c.train.rounds),
      number("train", "min_child_hessian", c.train.min_child_hessian),
      number("train", "subsample", c.train.subsample),
      number("train", "colsample", c.train.colsample),
      list("train", "grid_eta", c.grid_eta),
      list("train", "grid_max_depth", c.grid_max_depth),
      number("train", "validation_fraction", c.validation_fraction),
      number("train", "max_iters", c.max_iters),
      number("train", "score_cap", c.score_cap),
      number("run", "seed", c.seed),
      path("run", "out", c.out),
      number("run", "threads", c.threads),
      number("synth", "seed", s.seed),
      number("synth", "nx", s.nx),
      number("synth", "ny", s.ny),
      number("synth", "cell_km", s.cell_km),
      number("synth", "origin_lon", s.origin_lon),
      number("synth", "origin_lat", s.origin_lat),
      number("synth", "stations", s.stations),
      number("synth", "office_stations", s.office_stations),
      number("synth", "campus_stations", s.campus_stations),
      number("synth", "hospital_stations", s.hospital_stations),
      number("synth", "commercial_stations", s.commercial_stations),
      number("synth", "survey_users", s.survey_users),
      number("synth", "card_users", s.card_users),
      number("synth", "card_days", s.card_days),
      text("synth", "survey_date", s.survey_date),
      text("synth", "card_start", s.card_start),
      list("synth", "age", s.age),
      list("synth", "job", s.job),
      list("synth", "income", s.income),
      number("synth", "female_share", s.female_share),
      number("synth", "car_share", s.car_share),
      number("synth", "coupling", s.coupling),
      number("synth", "detour_rate", s.detour_rate),
      number("synth", "medical_share", s.medical_share),
      number("synth", "jitter_minutes", s.jitter_minutes),
      number("synth", "transfer_rate", s.transfer_rate),
      number("synth", "alt_home_rate", s.alt_home_rate),
      number("synth", "missing_poi_rate", s.missing_poi_rate),
      number("synth", "shift", s.shift),
  };
}

}  // namespace

void run_config::validate() const {
  auto const fail = [](std::string const& what) { throw usage_error("config: " + what); };
  if (!(box.max_lon > box.min_lon && box.max_lat > box.min_lat)) fail("[grid] bounding box is empty");
  if (!(cell_km > 0.0)) fail("[grid] cell_km must be > 0");
  if (transfer <= 0) fail("[thresholds] transfer must be > 0 seconds");
  if (anchor.cutoff <= 0 || anchor.cutoff >= kSecondsPerDay) {
    fail("[thresholds] anchor_cutoff must lie in (0, 86400)");
  }
  if (!(anchor.threshold >= 0.0 && anchor.threshold < 1.0)) {
    fail("[thresholds] anchor_freq must lie in [0, 1)");
  }
  if (anchor.min_days < 1) fail("[thresholds] anchor_min_days must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) fail("[thresholds] tau must lie in (0, 1)");
  if (!(tau_min >= 0.0 && tau_min <= tau)) fail("[thresholds] tau_min must lie in [0, tau]");
  if (max_trips < 1 || max_trips > 5) fail("[thresholds] max_trips must lie in [1, 5]");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail("[train] validation_fraction must lie in (0, 1)");
  }
  if (max_iters < 0) fail("[train] max_iters must be >= 0");
  for (auto const& t : train_grid()) {
    t.validate();
  }
  generator.validate();
}

selftrain::config run_config::selftrain_config() const {
  return selftrain::config{tau, tau_min, max_iters, score_cap, seed};
}

std::vector<gbdt::train_config> run_config::train_grid() const {
  std::vector<gbdt::train_config> grid;
  auto base = train;
  base.seed = seed;
  grid.push_back(base);
  auto const etas = grid_eta.empty() ? std::vector<double>{base.eta} : grid_eta;
  auto const depths = grid_max_depth.empty() ? std::vector<int>{base.max_depth} : grid_max_depth;
  for (auto const e : etas) {
    for (auto const d : depths) {
      auto c = base;
      c.eta = e;
      c.max_depth = d;
      if (std::find(begin(grid), end(grid), c) == end(grid)) {
        grid.push_back(c);
      }
    }
  }
  return grid;
}

unsigned run_config::thread_count() const { return threads == 0 ? default_threads() : threads; }

run_config parse_config(std::istream& in, std::filesystem::path const& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (pt::ini_parser_error const& e) {
    throw usage_error(std::string{"config: "} + e.what());
  }
  run_config c;
  auto b = bindings(c);
  for (auto const& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) {
      throw usage_error("config: key '" + section + "' outside a section");
    }
    for (auto const& [key, value] : keys) {
      auto const it = std::find_if(begin(b), end(b), [&](binding const& x) {
        return section == x.section && key == x.key;
      });
      if (it == end(b)) {
        throw usage_error("config: unknown key [" + section + "] " + key);
      }
      it->set(value.data());
    }
  }
  if (!base_dir.empty()) {
    for (auto* p : {&c.survey, &c.rides, &c.poi, &c.population, &c.land_price, &c.truth, &c.out}) {
      if (p->is_relative()) {
        *p = base_dir / *p;
      }
    }
  }
  c.validate();
  return c;
}

run_config load_config(std::filesystem::path const& path) {
  std::ifstream in{path};
  if (!in) {
    throw usage_error("config: cannot open " + path.string());
  }
  return parse_config(in, path.parent_path());
}

std::string to_ini(run_config const& c) {
  auto copy = c;
  std::string out;
  std::string section;
  for (auto const& b : bindings(copy)) {
    if (section != b.section) {
      if (!section.empty()) {
        out += '\n';
      }
      section = b.section;
      out += "[" + section + "]\n";
    }
    out += std::string{b.key} + " = " + b.get() + "\n";
  }
  return out;
}

}  // namespace tripinfer

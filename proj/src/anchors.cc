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

#include "tripinfer/anchors.h"

#include <algorithm>
#include <map>

#include "tripinfer/csv.h"
#include "tripinfer/parallel.h"

namespace tripinfer::anchors {

namespace {

enum class side { first_before, last_after };

// Per date: candidate origin stop, or none.
std::map<int, std::string const*> day_candidates(std::span<ingest::trip const> trips,
                                                 seconds_t cutoff, side s) {
  struct best {
    seconds_t dep;
    std::string const* stop;
  };
  std::map<int, best> per_day;
  for (auto const& t : trips) {
    auto const day = std::chrono::sys_days{t.service_date}.time_since_epoch().count();
    auto const dep = t.dep_time();
    if (s == side::first_before ? dep >= cutoff : dep <= cutoff) {
      continue;
    }
    auto const [it, inserted] = per_day.try_emplace(day, best{dep, &t.origin_stop()});
    if (inserted) {
      continue;
    }
    // Equal departure times keep the lower stop id so the result does not
    // depend on input order.
    auto& b = it->second;
    auto const better = s == side::first_before
                            ? (dep < b.dep || (dep == b.dep && t.origin_stop() < *b.stop))
                            : (dep > b.dep || (dep == b.dep && t.origin_stop() < *b.stop));
    if (better) {
      b = best{dep, &t.origin_stop()};
    }
  }
  std::map<int, std::string const*> out;
  for (auto const& [day, b] : per_day) {
    out.emplace(day, b.stop);
  }
  return out;
}

detection detect_side(std::span<ingest::trip const> trips, anchor_params const& p, side s) {
  auto const candidates = day_candidates(trips, p.cutoff, s);
  detection d;
  d.qualifying_days = candidates.size();
  if (candidates.empty()) {
    return d;
  }
  std::map<std::string_view, std::size_t> counts;
  for (auto const& [day, stop] : candidates) {
    ++counts[*stop];
  }
  // std::map iterates ids in ascending order, so strict > keeps the lowest
  // id on ties.
  auto best = begin(counts);
  for (auto it = begin(counts); it != end(counts); ++it) {
    if (it->second > best->second) {
      best = it;
    }
  }
  d.frequency = static_cast<double>(best->second) / static_cast<double>(candidates.size());
  if (d.frequency > p.threshold && d.qualifying_days >= p.min_days) {
    d.stop = std::string{best->first};
  }
  return d;
}

}  // namespace

detection detect_home(std::span<ingest::trip const> user_trips, anchor_params const& p) {
  return detect_side(user_trips, p, side::first_before);
}

detection detect_work(std::span<ingest::trip const> user_trips, anchor_params const& p) {
  return detect_side(user_trips, p, side::last_after);
}

anchor_result detect(std::span<ingest::trip const> user_trips, anchor_params const& p) {
  anchor_result r;
  if (user_trips.empty()) {
    return r;
  }
  r.user_id = user_trips.front().user_id;
  auto const home = detect_home(user_trips, p);
  auto const work = detect_work(user_trips, p);
  r.home_stop = home.stop;
  r.home_freq = home.frequency;
  r.work_stop = work.stop;
  r.work_freq = work.frequency;

  auto const home_days = day_candidates(user_trips, p.cutoff, side::first_before);
  auto const work_days = day_candidates(user_trips, p.cutoff, side::last_after);
  std::vector<int> days;
  for (auto const& [d, _] : home_days) {
    days.push_back(d);
  }
  for (auto const& [d, _] : work_days) {
    days.push_back(d);
  }
  std::sort(begin(days), end(days));
  r.qualifying_days = static_cast<std::size_t>(std::unique(begin(days), end(days)) - begin(days));
  return r;
}

std::vector<anchor_result> detect_all(std::span<ingest::trip const> trips, anchor_params const& p,
                                      unsigned threads) {
  std::vector<std::pair<std::size_t, std::size_t>> users;
  for (std::size_t i = 0; i < trips.size();) {
    auto j = i;
    while (j < trips.size() && trips[j].user_id == trips[i].user_id) {
      ++j;
    }
    users.emplace_back(i, j);
    i = j;
  }
  std::vector<anchor_result> results(users.size());
  parallel_for(users.size(), threads, [&](std::size_t u) {
    results[u] = detect(trips.subspan(users[u].first, users[u].second - users[u].first), p);
  });
  std::sort(begin(results), end(results),
            [](anchor_result const& a, anchor_result const& b) { return a.user_id < b.user_id; });
  return results;
}

std::optional<purpose> rule_label(ingest::trip const& t, anchor_result const& a) {
  auto const& dest = t.dest_stop();
  auto const at_work = a.work_stop && *a.work_stop == dest;
  auto const at_home = a.home_stop && *a.home_stop == dest;
  if (at_work && at_home) {
    return std::nullopt;
  }
  if (at_work) {
    return purpose::work;
  }
  if (at_home) {
    return purpose::home;
  }
  return std::nullopt;
}

void write_anchors(std::ostream& out, std::span<anchor_result const> results) {
  csv::write_row(out,
                 {"user_id", "home_stop", "home_freq", "work_stop", "work_freq", "qualifying_days"});
  for (auto const& r : results) {
    csv::write_row(out, {r.user_id, r.home_stop.value_or(""), csv::format_double(r.home_freq),
                         r.work_stop.value_or(""), csv::format_double(r.work_freq),
                         std::to_string(r.qualifying_days)});
  }
}

}  // namespace tripinfer::anchors

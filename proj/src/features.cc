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

#include "tripinfer/features.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include "tripinfer/csv.h"
#include "tripinfer/parallel.h"

namespace tripinfer::features {

namespace {

constexpr std::array<std::string_view, kChainTripBlock> kTripBlockNames{
    "Dep_Time", "Arr_Time", "Travel_Time", "Dep_X", "Dep_Y", "Arr_X", "Arr_Y",
    "Purpose",  "Purpose",  "Purpose",     "Purpose"};

void fill_anchor_block(std::span<double> block, std::optional<ingest::location> const& loc,
                       ingest::grid const& g) {
  if (!loc) {
    std::fill(begin(block), end(block), kMissing);
    return;
  }
  auto const& cell = ingest::locate(loc->lon, loc->lat, g);
  block[0] = cos_grid(cell.x_index, g.spec().nx);
  block[1] = cos_grid(cell.y_index, g.spec().ny);
  block[2] = cell.population_density;
  block[3] = cell.land_price;
}

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.write(reinterpret_cast<char const*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw data_error("feature matrix: truncated input");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

std::array<std::string, kChainFeatureCount> const& chain_feature_names() {
  static auto const names = [] {
    std::array<std::string, kChainFeatureCount> n;
    std::size_t i = 0;
    for (auto const* who : {"Home", "Work"}) {
      for (auto const* what : {"_X", "_Y", "_Pop", "_LP"}) {
        n[i++] = std::string{who} + what;
      }
    }
    for (std::size_t slot = 1; slot <= kChainTripSlots; ++slot) {
      for (std::size_t k = 0; k < kChainTripBlock; ++k) {
        auto name = std::string{kTripBlockNames[k]} + std::to_string(slot);
        if (k >= 7) {
          name += "_" + std::to_string(k - 6);
        }
        n[i++] = std::move(name);
      }
    }
    return n;
  }();
  return names;
}

std::string_view chain_feature_group(std::size_t index) {
  if (index < 2 * kChainAnchorBlock) {
    return "jobs-housing";
  }
  auto const k = (index - 2 * kChainAnchorBlock) % kChainTripBlock;
  return k >= 7 ? "purpose" : "spatiotemporal";
}

std::string_view trip_feature_group(std::size_t index) {
  return index < 3 ? "temporal" : "land-use";
}

double cos_time(seconds_t t, seconds_t period) {
  if (period <= 0 || t < 0 || t >= period) {
    throw data_error("cos_time: time " + std::to_string(t) + " outside [0, " +
                     std::to_string(period) + ")");
  }
  return std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(period));
}

double cos_grid(int index, int count) {
  if (count <= 0 || index < 0 || index >= count) {
    throw data_error("cos_grid: index " + std::to_string(index) + " outside [0, " +
                     std::to_string(count) + ")");
  }
  return std::cos(2.0 * std::numbers::pi * static_cast<double>(index) /
                  static_cast<double>(count));
}

trip_features trip_feature_vector(ingest::trip const& t, ingest::poi_table const& poi,
                                  std::size_t* missing_profiles) {
  trip_features f{};
  f[0] = cos_time(t.dep_time());
  f[1] = cos_time(t.arr_time());
  f[2] = static_cast<double>(t.arr_time() - t.dep_time());
  auto const put_profile = [&](std::string const& stop, std::size_t offset) {
    auto const it = poi.find(stop);
    if (it == end(poi)) {
      if (missing_profiles != nullptr) {
        ++*missing_profiles;
      }
      return;  // zeros
    }
    std::copy(begin(it->second.proportions), end(it->second.proportions), begin(f) + offset);
  };
  put_profile(t.origin_stop(), 3);
  put_profile(t.dest_stop(), 3 + ingest::kNumPoiCategories);
  return f;
}

chain_features chain_feature_vector(std::span<ingest::trip const> chain,
                                    anchor_points const& anchors, ingest::grid const& g,
                                    std::span<purpose const> purposes, std::size_t max_trips) {
  if (chain.empty()) {
    throw data_error("chain_features: empty day chain");
  }
  if (purposes.size() != chain.size()) {
    throw std::invalid_argument("chain_features: purposes not aligned with chain");
  }
  max_trips = std::min(max_trips, kChainTripSlots);

  chain_features f;
  f.fill(kMissing);
  auto const span = std::span<double>{f};
  fill_anchor_block(span.subspan(0, kChainAnchorBlock), anchors.home, g);
  fill_anchor_block(span.subspan(kChainAnchorBlock, kChainAnchorBlock), anchors.work, g);

  auto const nx = g.spec().nx;
  auto const ny = g.spec().ny;
  for (std::size_t slot = 0; slot < std::min(chain.size(), max_trips); ++slot) {
    auto const& t = chain[slot];
    auto block = span.subspan(2 * kChainAnchorBlock + slot * kChainTripBlock, kChainTripBlock);
    auto const& dep_cell = ingest::locate(t.origin_lon(), t.origin_lat(), g);
    auto const& arr_cell = ingest::locate(t.dest_lon(), t.dest_lat(), g);
    block[0] = cos_time(t.dep_time());
    block[1] = cos_time(t.arr_time());
    block[2] = static_cast<double>(t.arr_time() - t.dep_time());
    block[3] = cos_grid(dep_cell.x_index, nx);
    block[4] = cos_grid(dep_cell.y_index, ny);
    block[5] = cos_grid(arr_cell.x_index, nx);
    block[6] = cos_grid(arr_cell.y_index, ny);
    for (std::size_t k = 0; k < kNumPurposes; ++k) {
      block[7 + k] = static_cast<std::size_t>(purposes[slot]) == k ? 1.0 : 0.0;
    }
  }
  return f;
}

matrix trip_feature_matrix(std::span<ingest::trip const> trips, ingest::poi_table const& poi,
                           unsigned threads, std::size_t* missing_profiles) {
  matrix m{trips.size(), kTripFeatureCount};
  std::atomic<std::size_t> missing{0};
  parallel_chunks(trips.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::size_t local_missing = 0;
    for (auto i = begin; i < end; ++i) {
      auto const f = trip_feature_vector(trips[i], poi, &local_missing);
      std::copy(f.begin(), f.end(), m.row(i).begin());
    }
    missing += local_missing;
  });
  if (missing_profiles != nullptr) {
    *missing_profiles += missing.load();
  }
  return m;
}

void write_matrix_csv(std::ostream& out, matrix const& m, std::span<std::string const> names) {
  csv::write_row(out, std::vector<std::string>(names.begin(), names.end()));
  std::vector<std::string> row(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      row[c] = csv::format_double(m(r, c));
    }
    csv::write_row(out, row);
  }
}

void write_matrix_binary(std::ostream& out, matrix const& m) {
  out.write("TIFM", 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  for (auto const v : m.data()) {
    put_le<double>(out, v);
  }
}

matrix read_matrix_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view{magic, 4} != "TIFM") {
    throw data_error("feature matrix: bad magic");
  }
  if (get_le<std::uint32_t>(in) != 1) {
    throw data_error("feature matrix: unsupported version");
  }
  auto const rows = get_le<std::uint64_t>(in);
  auto const cols = get_le<std::uint64_t>(in);
  std::vector<double> data(rows * cols);
  for (auto& v : data) {
    v = get_le<double>(in);
  }
  return matrix{rows, cols, std::move(data)};
}

}  // namespace tripinfer::features

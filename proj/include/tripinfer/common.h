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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tripinfer {

// Bad input data (malformed file, violated precondition on data). Maps to
// CLI exit code 2.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad invocation or configuration. Maps to CLI exit code 1.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seconds since midnight of the service date.
using seconds_t = std::int32_t;

constexpr seconds_t kSecondsPerDay = 86400;

// Sentinel for "no trip" / "unknown anchor" in feature vectors; also the
// missing-value marker understood by the tree learner.
constexpr double kMissing = -1.0;

enum class purpose : std::uint8_t { work = 0, home = 1, shopping_entertainment = 2, medical = 3 };
constexpr std::size_t kNumPurposes = 4;

enum class label_source : std::uint8_t { none, survey, rule, model, pseudo };

enum class age_band : std::uint8_t { under20 = 0, from20to59 = 1, over60 = 2 };
enum class job_status : std::uint8_t { with_job = 0, student = 1, retired_no_job = 2 };
enum class income_band : std::uint8_t { zero = 0, zero_to10 = 1, ten_to15 = 2, over15 = 3 };

constexpr std::array<std::string_view, 4> kPurposeNames{"Work", "Home", "SE", "Medical"};
constexpr std::array<std::string_view, 3> kAgeNames{"Under20", "From20To59", "Over60"};
constexpr std::array<std::string_view, 3> kJobNames{"WithJob", "Student", "RetiredNoJob"};
constexpr std::array<std::string_view, 4> kIncomeNames{"Zero", "ZeroTo10", "TenTo15", "Over15"};
constexpr std::array<std::string_view, 5> kLabelSourceNames{"none", "survey", "rule", "model",
                                                            "pseudo"};

template <typename Enum, std::size_t N>
constexpr std::string_view enum_name(Enum e, std::array<std::string_view, N> const& names) {
  return names[static_cast<std::size_t>(e)];
}

inline std::string_view to_string(purpose p) { return enum_name(p, kPurposeNames); }
inline std::string_view to_string(age_band a) { return enum_name(a, kAgeNames); }
inline std::string_view to_string(job_status j) { return enum_name(j, kJobNames); }
inline std::string_view to_string(income_band i) { return enum_name(i, kIncomeNames); }
inline std::string_view to_string(label_source s) { return enum_name(s, kLabelSourceNames); }

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, std::array<std::string_view, N> const& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) {
      return static_cast<Enum>(i);
    }
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
Enum parse_enum_or_throw(std::string_view s, std::array<std::string_view, N> const& names,
                         std::string_view what) {
  auto const e = parse_enum<Enum>(s, names);
  if (!e) {
    throw data_error("unknown " + std::string{what} + " '" + std::string{s} + "'");
  }
  return *e;
}

}  // namespace tripinfer

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

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tripinfer::csv {

// RFC-4180 record reader: quoted fields may contain the delimiter, doubled
// quotes and line breaks. Accepts both "\n" and "\r\n" record terminators.
class reader {
public:
  explicit reader(std::istream& in, char delimiter = ',');

  // Reads the next record into `fields`. Returns false at end of input.
  // Throws data_error on an unterminated quoted field.
  bool next(std::vector<std::string>& fields);

  // 0 for the first record read (the header, when present).
  std::size_t record_number() const { return record_number_; }

private:
  std::istream& in_;
  char delimiter_;
  std::size_t record_number_{static_cast<std::size_t>(-1)};
};

// Maps header names to column positions.
class header {
public:
  header() = default;
  explicit header(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;

  // Throws data_error("missing mandatory column '<name>'").
  std::size_t require(std::string_view name) const;

  std::vector<std::string> const& names() const { return names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Quotes the field when it contains the delimiter, a quote or a line break.
std::string escape(std::string_view field, char delimiter = ',');

void write_row(std::ostream& out, std::vector<std::string> const& fields, char delimiter = ',');

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

// Strict parsers: the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

}  // namespace tripinfer::csv

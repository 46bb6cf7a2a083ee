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

#include "tripinfer/csv.h"

#include <charconv>
#include <cmath>

#include "tripinfer/common.h"

namespace tripinfer::csv {

reader::reader(std::istream& in, char delimiter) : in_{in}, delimiter_{delimiter} {}

bool reader::next(std::vector<std::string>& fields) {
  fields.clear();
  if (in_.peek() == std::char_traits<char>::eof()) {
    return false;
  }
  ++record_number_;

  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  while (true) {
    auto const c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes) {
        throw data_error("record " + std::to_string(record_number_) +
                         ": unterminated quoted field");
      }
      fields.push_back(std::move(field));
      return true;
    }
    auto const ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (ch == delimiter_) {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (ch == '\r' && in_.peek() == '\n') {
      in_.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
}

header::header(std::vector<std::string> names) : names_{std::move(names)} {
  if (!names_.empty() && names_.front().starts_with("\xEF\xBB\xBF")) {
    names_.front().erase(0, 3);
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    index_.emplace(names_[i], i);
  }
}

std::optional<std::size_t> header::find(std::string_view name) const {
  auto const it = index_.find(std::string{name});
  if (it == end(index_)) {
    return std::nullopt;
  }
  return it->second;
}

std::size_t header::require(std::string_view name) const {
  auto const col = find(name);
  if (!col) {
    throw data_error("missing mandatory column '" + std::string{name} + "'");
  }
  return *col;
}

std::string escape(std::string_view field, char delimiter) {
  if (field.find_first_of(std::string{delimiter} + "\"\r\n") == std::string_view::npos) {
    return std::string{field};
  }
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (auto const c : field) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, std::vector<std::string> const& fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) {
      out.put(delimiter);
    }
    out << escape(fields[i], delimiter);
  }
  out.put('\n');
}

std::string format_double(double v) {
  char buf[32];
  auto const [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw std::runtime_error("format_double: to_chars failed");
  }
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view s) {
  double v{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v{};
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

}  // namespace tripinfer::csv

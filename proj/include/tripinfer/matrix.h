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

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace tripinfer {

// Dense row-major matrix of doubles.
class matrix {
public:
  matrix() = default;
  matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}
  matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_{rows}, cols_{cols}, data_{std::move(data)} {
    assert(data_.size() == rows_ * cols_);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<double const> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> const& data() const { return data_; }

  void append_row(std::span<double const> values) {
    assert(rows_ == 0 || values.size() == cols_);
    if (rows_ == 0) {
      cols_ = values.size();
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(matrix const&, matrix const&) = default;

private:
  std::size_t rows_{};
  std::size_t cols_{};
  std::vector<double> data_;
};

// Rows of `m` selected by index, in the given order.
inline matrix select_rows(matrix const& m, std::span<std::size_t const> idx) {
  matrix out;
  for (auto const i : idx) {
    out.append_row(m.row(i));
  }
  if (out.empty()) {
    out = matrix{0, m.cols()};
  }
  return out;
}

}  // namespace tripinfer

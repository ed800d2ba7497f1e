// Copyright 2026 The MiniALFRED Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace minialfred::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix of doubles. Vectors are 1 x n.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
    if (r < 0 || c < 0) throw ShapeError("negative tensor dimension");
  }
  Tensor(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
      throw ShapeError("value count does not match shape");
    }
  }
  static Tensor row_vector(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Tensor(1, n, std::move(values));
  }

  std::vector<int> shape() const { return {rows, cols}; }
  std::size_t size() const { return data.size(); }
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::string shape_string(const Tensor& t);

}  // namespace minialfred::nn

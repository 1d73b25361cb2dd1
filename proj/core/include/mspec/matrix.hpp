// core/include/mspec/matrix.hpp

// Copyright 2026  MSpec authors

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

#ifndef MSPEC_MATRIX_HPP_
#define MSPEC_MATRIX_HPP_

#include <cstddef>
#include <vector>

#include "mspec/errors.hpp"

namespace mspec {

// Dense row-major matrix of doubles. The DSP front-end works in doubles
// end to end so that identical inputs reproduce bit-identical images.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ShapeError("Matrix: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double &operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::vector<double> &storage() { return data_; }
  const std::vector<double> &storage() const { return data_; }

  bool same_shape(const Matrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
};

}  // namespace mspec

#endif  // MSPEC_MATRIX_HPP_

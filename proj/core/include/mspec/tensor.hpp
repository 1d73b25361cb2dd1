// core/include/mspec/tensor.hpp

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

#ifndef MSPEC_TENSOR_HPP_
#define MSPEC_TENSOR_HPP_

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mspec/errors.hpp"

namespace mspec::nn {

// Dense row-major tensor. Image batches use the order
// batch x channels x rows x cols.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(numel_of(shape)), 0.0);
  }

  static int64_t numel_of(const std::vector<int> &s) {
    int64_t n = 1;
    for (const int d : s) {
      if (d <= 0) throw ShapeError("Tensor: nonpositive dimension");
      n *= d;
    }
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  bool same_shape(const Tensor &o) const { return shape == o.shape; }

  static std::string shape_str(const std::vector<int> &s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
      if (i) out += "x";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }
};

}  // namespace mspec::nn

#endif  // MSPEC_TENSOR_HPP_

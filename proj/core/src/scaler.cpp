// core/src/scaler.cpp

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

#include "mspec/scaler.hpp"

#include <cmath>

#include "mspec/errors.hpp"

namespace mspec::clf {

Standardizer Standardizer::fit(const std::vector<std::vector<double>> &rows) {
  if (rows.empty()) throw ValueError("Standardizer::fit: no rows");
  const size_t dim = rows[0].size();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 1.0);

  for (const auto &row : rows) {
    if (row.size() != dim) throw ShapeError("Standardizer::fit: ragged rows");
    for (size_t j = 0; j < dim; ++j) s.mean[j] += row[j];
  }
  const double n = static_cast<double>(rows.size());
  for (size_t j = 0; j < dim; ++j) s.mean[j] /= n;

  std::vector<double> var(dim, 0.0);
  for (const auto &row : rows)
    for (size_t j = 0; j < dim; ++j) {
      const double d = row[j] - s.mean[j];
      var[j] += d * d;
    }
  for (size_t j = 0; j < dim; ++j) {
    const double sd = std::sqrt(var[j] / n);
    s.stddev[j] = (sd > 1e-12) ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::transform(const std::vector<double> &x) const {
  if (x.size() != mean.size()) throw ShapeError("Standardizer::transform: dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / stddev[j];
  return out;
}

std::vector<std::vector<double>> Standardizer::transform_all(
    const std::vector<std::vector<double>> &rows) const {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto &row : rows) out.push_back(transform(row));
  return out;
}

}  // namespace mspec::clf

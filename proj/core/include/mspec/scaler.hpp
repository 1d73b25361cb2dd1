// core/include/mspec/scaler.hpp

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

#ifndef MSPEC_SCALER_HPP_
#define MSPEC_SCALER_HPP_

#include <vector>

namespace mspec::clf {

// Per-feature z-score normalization. Fit on training folds only; the nested
// CV harness records which speakers contributed to each fit.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // features with (near-)zero spread use 1.0

  static Standardizer fit(const std::vector<std::vector<double>> &rows);

  std::vector<double> transform(const std::vector<double> &x) const;
  std::vector<std::vector<double>> transform_all(
      const std::vector<std::vector<double>> &rows) const;
};

}  // namespace mspec::clf

#endif  // MSPEC_SCALER_HPP_

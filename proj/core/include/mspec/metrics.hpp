// core/include/mspec/metrics.hpp

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

#ifndef MSPEC_METRICS_HPP_
#define MSPEC_METRICS_HPP_

#include <vector>

namespace mspec::eval {

// Fractional ranks (1-based, ties get the mean rank).
std::vector<double> fractional_ranks(const std::vector<double> &x);

// Pearson correlation of fractional ranks. Throws on length < 3, length
// mismatch, or a constant input (undefined rank correlation).
double spearman_rho(const std::vector<double> &x, const std::vector<double> &y);

// Exact pair-counting AUC with ties counted 1/2. labels are +1/-1 and both
// classes must be present.
double auc_score(const std::vector<double> &scores, const std::vector<int> &labels);

struct BinaryMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro-averaged over the two classes
  double recall = 0.0;     // macro-averaged
  double auc = 0.0;
};

// predictions and labels are +1/-1; scores feed the AUC.
BinaryMetrics compute_metrics(const std::vector<double> &scores,
                              const std::vector<int> &predictions,
                              const std::vector<int> &labels);

}  // namespace mspec::eval

#endif  // MSPEC_METRICS_HPP_

// core/src/metrics.cpp

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

#include "mspec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mspec/errors.hpp"

namespace mspec::eval {

std::vector<double> fractional_ranks(const std::vector<double> &x) {
  const size_t n = x.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&x](size_t a, size_t b) { return x[a] < x[b]; });

  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size()) throw ValueError("spearman_rho: length mismatch");
  if (x.size() < 3) throw ValueError("spearman_rho: need at least 3 points");

  const std::vector<double> rx = fractional_ranks(x);
  const std::vector<double> ry = fractional_ranks(y);

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw ValueError("spearman_rho: correlation undefined for a constant input");
  return sxy / std::sqrt(sxx * syy);
}

double auc_score(const std::vector<double> &scores, const std::vector<int> &labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ValueError("auc_score: scores/labels mismatch");
  long long n_pos = 0, n_neg = 0;
  for (const int y : labels) {
    if (y == 1) ++n_pos;
    else if (y == -1) ++n_neg;
    else throw ValueError("auc_score: labels must be +1 or -1");
  }
  if (n_pos == 0 || n_neg == 0)
    throw ValueError("auc_score: AUC undefined with a single class");

  double ordered = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != -1) continue;
      if (scores[i] > scores[j]) ordered += 1.0;
      else if (scores[i] == scores[j]) ordered += 0.5;
    }
  }
  return ordered / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

BinaryMetrics compute_metrics(const std::vector<double> &scores,
                              const std::vector<int> &predictions,
                              const std::vector<int> &labels) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw ValueError("compute_metrics: predictions/labels mismatch");

  long long tp = 0, tn = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1)
      (predictions[i] == 1 ? tp : fn)++;
    else
      (predictions[i] == -1 ? tn : fp)++;
  }

  auto ratio = [](long long num, long long den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };

  BinaryMetrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(labels.size());
  m.precision = 0.5 * (ratio(tp, tp + fp) + ratio(tn, tn + fn));
  m.recall = 0.5 * (ratio(tp, tp + fn) + ratio(tn, tn + fp));
  m.auc = auc_score(scores, labels);
  return m;
}

}  // namespace mspec::eval

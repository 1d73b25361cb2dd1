// core/src/fusion.cpp

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

#include "mspec/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "mspec/errors.hpp"
#include "mspec/rng.hpp"

namespace mspec::clf {

std::vector<double> early_fuse(const std::vector<std::vector<double>> &per_stream_features) {
  if (per_stream_features.empty()) throw ValueError("early_fuse: no streams");
  std::vector<double> out;
  size_t total = 0;
  for (const auto &s : per_stream_features) total += s.size();
  out.reserve(total);
  for (const auto &s : per_stream_features) {
    if (s.empty()) throw ValueError("early_fuse: missing stream");
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

FusionWeights learn_fusion_weights(const std::vector<std::vector<double>> &stream_scores,
                                   const std::vector<int> &labels, uint64_t seed) {
  const size_t n_streams = stream_scores.size();
  if (n_streams == 0) throw ValueError("learn_fusion_weights: no streams");
  const size_t n = labels.size();
  if (n == 0) throw ValueError("learn_fusion_weights: no samples");
  for (const auto &s : stream_scores)
    if (s.size() != n)
      throw ValueError("learn_fusion_weights: each stream must score every sample");
  for (const int y : labels)
    if (y != 1 && y != -1) throw ValueError("learn_fusion_weights: labels must be +1 or -1");

  bool any_varying = false;
  for (const auto &s : stream_scores) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    if (*hi > *lo) any_varying = true;
  }
  if (!any_varying)
    throw ValueError("learn_fusion_weights: degenerate input, all stream scores constant");

  constexpr double kLearningRate = 1e-2;
  constexpr double kL2 = 1e-3;
  constexpr int kEpochs = 100;

  FusionWeights fw;
  fw.weights.assign(n_streams, 0.0);
  fw.bias = 0.0;

  Rng rng = make_rng(seed, "fusion_sgd");
  std::vector<int> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < kEpochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const int idx : order) {
      const double y = static_cast<double>(labels[static_cast<size_t>(idx)]);
      double margin = fw.bias;
      for (size_t s = 0; s < n_streams; ++s)
        margin += fw.weights[s] * stream_scores[s][static_cast<size_t>(idx)];
      margin *= y;

      for (size_t s = 0; s < n_streams; ++s) {
        double grad = kL2 * fw.weights[s];
        if (margin < 1.0) grad -= y * stream_scores[s][static_cast<size_t>(idx)];
        fw.weights[s] -= kLearningRate * grad;
      }
      if (margin < 1.0) fw.bias += kLearningRate * y;
    }
  }

  bool any_nonzero = false;
  for (const double w : fw.weights)
    if (w != 0.0) any_nonzero = true;
  if (!any_nonzero) fw.weights[0] = 1e-12;  // keep the invariant under pathological inputs
  return fw;
}

double late_fuse(const FusionWeights &weights, const std::vector<double> &scores) {
  if (scores.size() != weights.weights.size())
    throw ShapeError("late_fuse: stream count mismatch");
  double acc = weights.bias;
  for (size_t s = 0; s < scores.size(); ++s) acc += weights.weights[s] * scores[s];
  return acc;
}

}  // namespace mspec::clf

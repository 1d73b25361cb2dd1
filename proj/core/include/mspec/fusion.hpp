// core/include/mspec/fusion.hpp

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

#ifndef MSPEC_FUSION_HPP_
#define MSPEC_FUSION_HPP_

#include <cstdint>
#include <vector>

namespace mspec::clf {

// Early fusion: concatenation of per-stream feature vectors in a fixed
// stream order (wideband, narrowband, wavelet).
std::vector<double> early_fuse(const std::vector<std::vector<double>> &per_stream_features);

// Late-fusion combiner: a linear model over per-stream classifier scores,
// trained with SGD on the hinge loss with an L2 penalty.
struct FusionWeights {
  std::vector<double> weights;  // one per stream
  double bias = 0.0;
};

// stream_scores[s][i] is the score stream s assigns to training sample i;
// labels are +1/-1. Fixed schedule: learning rate 1e-2, 100 epochs, L2
// coefficient 1e-3, seeded shuffling.
FusionWeights learn_fusion_weights(const std::vector<std::vector<double>> &stream_scores,
                                   const std::vector<int> &labels, uint64_t seed);

double late_fuse(const FusionWeights &weights, const std::vector<double> &scores);

}  // namespace mspec::clf

#endif  // MSPEC_FUSION_HPP_

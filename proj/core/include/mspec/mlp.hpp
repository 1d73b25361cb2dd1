// core/include/mspec/mlp.hpp

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

#ifndef MSPEC_MLP_HPP_
#define MSPEC_MLP_HPP_

#include <cstdint>
#include <vector>

#include "mspec/nn.hpp"

namespace mspec::clf {

struct MlpConfig {
  int hidden1 = 128;
  int hidden2 = 64;
  double dropout = 0.3;  // training only
  int max_epochs = 200;
  int batch_size = 32;
  double learning_rate = 1e-3;
};

// Two hidden Dense+ReLU layers and a 2-way softmax head. Class index 1 is
// the positive (+1 / patient) class.
struct MlpModel {
  nn::LayerParams fc1, fc2, fc3;
  double dropout = 0.3;
};

// Cross-entropy training with Adam (dropout masks on the hidden
// activations). When a validation set is supplied, valid_accuracy_curve (if
// non-null) receives the accuracy after every epoch; the nested CV uses that
// curve to pick the epoch budget.
MlpModel mlp_train(const std::vector<std::vector<double>> &features,
                   const std::vector<int> &labels, const MlpConfig &config, uint64_t seed,
                   int epochs = -1,  // -1: config.max_epochs
                   const std::vector<std::vector<double>> *valid_features = nullptr,
                   const std::vector<int> *valid_labels = nullptr,
                   std::vector<double> *valid_accuracy_curve = nullptr);

// Softmax probability of the positive class.
double mlp_score(const MlpModel &model, const std::vector<double> &x);

int mlp_predict(const MlpModel &model, const std::vector<double> &x);

}  // namespace mspec::clf

#endif  // MSPEC_MLP_HPP_

// core/include/mspec/svm.hpp

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

#ifndef MSPEC_SVM_HPP_
#define MSPEC_SVM_HPP_

#include <cstdint>
#include <optional>
#include <vector>

namespace mspec::clf {

// Soft-margin SVM with a Gaussian kernel, trained by sequential minimal
// optimization on the dual.
struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i per support vector
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  // Platt sigmoid P(y=+1 | s) = 1 / (1 + exp(A*s + B)); absent until
  // platt_calibrate has run.
  std::optional<double> platt_a;
  std::optional<double> platt_b;
};

double gaussian_kernel(const std::vector<double> &x, const std::vector<double> &y,
                       double gamma);

// SMO (maximal-violating-pair working set) to the given KKT tolerance.
// labels are +1/-1, each class needs at least two samples. Features should
// already be standardized.
SvmModel svm_train(const std::vector<std::vector<double>> &features,
                   const std::vector<int> &labels, double c, double gamma,
                   double tol = 1e-3);

// Signed decision value sum_i alpha_i y_i K(x_i, x) + b; sign is the
// predicted class (exactly 0 is resolved as the negative class).
double svm_score(const SvmModel &model, const std::vector<double> &x);

int svm_predict(const SvmModel &model, const std::vector<double> &x);

// Regularized maximum-likelihood sigmoid fit (Newton iterations) mapping
// decision values to probabilities. Both classes must be present.
std::pair<double, double> platt_calibrate(const std::vector<double> &scores,
                                          const std::vector<int> &labels);

// Stores the fitted coefficients on the model.
void platt_calibrate(SvmModel &model, const std::vector<double> &train_scores,
                     const std::vector<int> &train_labels);

double platt_probability(double score, double platt_a, double platt_b);
double platt_probability(const SvmModel &model, double score);

}  // namespace mspec::clf

#endif  // MSPEC_SVM_HPP_

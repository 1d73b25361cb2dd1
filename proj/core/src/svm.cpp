// core/src/svm.cpp

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

#include "mspec/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mspec/errors.hpp"

namespace mspec::clf {

double gaussian_kernel(const std::vector<double> &x, const std::vector<double> &y,
                       double gamma) {
  if (x.size() != y.size()) throw ShapeError("gaussian_kernel: dimension mismatch");
  double d2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

SvmModel svm_train(const std::vector<std::vector<double>> &features,
                   const std::vector<int> &labels, double c, double gamma, double tol) {
  const int n = static_cast<int>(features.size());
  if (n < 4 || labels.size() != features.size())
    throw ValueError("svm_train: need matching features/labels, at least 2 per class");
  if (c <= 0.0 || gamma <= 0.0 || tol <= 0.0)
    throw ValueError("svm_train: C, gamma and tol must be positive");

  int n_pos = 0, n_neg = 0;
  for (const int y : labels) {
    if (y == 1) ++n_pos;
    else if (y == -1) ++n_neg;
    else throw ValueError("svm_train: labels must be +1 or -1");
  }
  if (n_pos < 2 || n_neg < 2)
    throw ValueError("svm_train: need at least 2 samples per class (got " +
                     std::to_string(n_pos) + " positive, " + std::to_string(n_neg) +
                     " negative)");
  for (const auto &row : features)
    for (const double v : row)
      if (!std::isfinite(v)) throw ValueError("svm_train: non-finite feature value");

  // dense kernel matrix; problem sizes here are a few hundred samples
  std::vector<std::vector<double>> kmat(n, std::vector<double>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      kmat[i][j] = kmat[j][i] = gaussian_kernel(features[i], features[j], gamma);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of the dual objective
  const std::vector<int> &y = labels;

  const long long max_iter = 100000 + 200LL * n;
  long long iter = 0;
  double m_up = 0.0, m_low = 0.0;
  for (; iter < max_iter; ++iter) {
    // maximal violating pair
    int i = -1, j = -1;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
      const bool in_low = (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c);
      if (in_up && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || m_up - m_low < tol) break;

    // two-variable subproblem along y_i*delta / -y_j*delta
    double eta = kmat[i][i] + kmat[j][j] - 2.0 * kmat[i][j];
    if (eta <= 0.0) eta = 1e-12;
    double delta = (m_up - m_low) / eta;

    // box constraints for alpha_i + y_i*delta and alpha_j - y_j*delta
    double hi = delta;
    if (y[i] == 1) hi = std::min(hi, c - alpha[i]);
    else hi = std::min(hi, alpha[i]);
    if (y[j] == 1) hi = std::min(hi, alpha[j]);
    else hi = std::min(hi, c - alpha[j]);
    delta = std::max(0.0, std::min(delta, hi));
    if (delta == 0.0) break;  // numerically stuck at the boundary

    const double dai = y[i] * delta;
    const double daj = -y[j] * delta;
    alpha[i] += dai;
    alpha[j] += daj;
    for (int t = 0; t < n; ++t) grad[t] += y[t] * delta * (kmat[t][i] - kmat[t][j]);
  }

  // bias from free support vectors, else midpoint of the bound interval
  double b_sum = 0.0;
  int b_count = 0;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      b_sum += -y[t] * grad[t];
      ++b_count;
    }
  }
  const double bias = (b_count > 0) ? b_sum / b_count : 0.5 * (m_up + m_low);

  SvmModel model;
  model.gamma = gamma;
  model.c = c;
  model.bias = bias;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(features[t]);
      model.dual_coefs.push_back(alpha[t] * y[t]);
    }
  }
  if (model.support_vectors.empty())
    throw ValueError("svm_train: optimizer returned no support vectors");
  return model;
}

double svm_score(const SvmModel &model, const std::vector<double> &x) {
  double acc = model.bias;
  for (size_t i = 0; i < model.support_vectors.size(); ++i)
    acc += model.dual_coefs[i] * gaussian_kernel(model.support_vectors[i], x, model.gamma);
  return acc;
}

int svm_predict(const SvmModel &model, const std::vector<double> &x) {
  return svm_score(model, x) > 0.0 ? 1 : -1;
}

std::pair<double, double> platt_calibrate(const std::vector<double> &scores,
                                          const std::vector<int> &labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ValueError("platt_calibrate: scores/labels mismatch");
  int n_pos = 0, n_neg = 0;
  for (const int y : labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw ValueError("platt_calibrate: both classes must be present");

  // regularized targets; Newton iterations with backtracking
  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  const size_t n = scores.size();
  std::vector<double> target(n);
  for (size_t i = 0; i < n; ++i) target[i] = labels[i] == 1 ? hi : lo;

  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));

  auto objective = [&](double aa, double bb) {
    double obj = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double f = aa * scores[i] + bb;
      if (f >= 0.0)
        obj += target[i] * f + std::log1p(std::exp(-f));
      else
        obj += (target[i] - 1.0) * f + std::log1p(std::exp(f));
    }
    return obj;
  };

  const double sigma = 1e-12;
  double fval = objective(a, b);
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double f = a * scores[i] + b;
      double p, q;
      if (f >= 0.0) {
        p = std::exp(-f) / (1.0 + std::exp(-f));
        q = 1.0 / (1.0 + std::exp(-f));
      } else {
        p = 1.0 / (1.0 + std::exp(f));
        q = std::exp(f) / (1.0 + std::exp(f));
      }
      const double d1 = target[i] - p;
      const double d2 = p * q;
      g1 += scores[i] * d1;
      g2 += d1;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    bool improved = false;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        improved = true;
        break;
      }
      step /= 2.0;
    }
    if (!improved) break;
  }
  return {a, b};
}

void platt_calibrate(SvmModel &model, const std::vector<double> &train_scores,
                     const std::vector<int> &train_labels) {
  const auto [a, b] = platt_calibrate(train_scores, train_labels);
  model.platt_a = a;
  model.platt_b = b;
}

double platt_probability(double score, double platt_a, double platt_b) {
  const double f = platt_a * score + platt_b;
  if (f >= 0.0) {
    const double e = std::exp(-f);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(f));
}

double platt_probability(const SvmModel &model, double score) {
  if (!model.platt_a.has_value() || !model.platt_b.has_value())
    throw ValueError("platt_probability: model has no Platt coefficients");
  return platt_probability(score, *model.platt_a, *model.platt_b);
}

}  // namespace mspec::clf

// tests/unit/test_clf.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mspec/fusion.hpp"
#include "mspec/mlp.hpp"
#include "mspec/scaler.hpp"
#include "mspec/svm.hpp"

using namespace mspec;

namespace {

struct Blobs {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

// two Gaussian blobs, centres 10 sigma apart
Blobs make_blobs(int per_class, uint64_t seed, double separation = 10.0) {
  Blobs data;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < per_class; ++i) {
    data.x.push_back({g(rng), g(rng)});
    data.y.push_back(-1);
  }
  for (int i = 0; i < per_class; ++i) {
    data.x.push_back({separation + g(rng), g(rng)});
    data.y.push_back(1);
  }
  return data;
}

// Jacobi eigenvalue sweep for small symmetric matrices
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-22) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-18) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  return eig;
}

int train_accuracy(const clf::SvmModel &model, const Blobs &data) {
  int correct = 0;
  for (size_t i = 0; i < data.x.size(); ++i)
    if (clf::svm_predict(model, data.x[i]) == data.y[i]) ++correct;
  return correct;
}

}  // namespace

TEST_CASE("well-separated blobs reach training accuracy 1.0") {
  const Blobs data = make_blobs(20, 31);
  const clf::SvmModel model = clf::svm_train(data.x, data.y, 10.0, 0.1);
  CHECK(train_accuracy(model, data) == 40);

  // blob centres score on the correct side, positive side higher
  CHECK(clf::svm_score(model, {10.0, 0.0}) > 0.0);
  CHECK(clf::svm_score(model, {0.0, 0.0}) < 0.0);
  CHECK(clf::svm_score(model, {10.0, 0.0}) > clf::svm_score(model, {0.0, 0.0}));
}

TEST_CASE("the Gaussian kernel shatters XOR") {
  const std::vector<std::vector<double>> x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> y{1, 1, -1, -1};
  const clf::SvmModel model = clf::svm_train(x, y, 100.0, 1.0);
  for (size_t i = 0; i < x.size(); ++i) CHECK(clf::svm_predict(model, x[i]) == y[i]);
}

TEST_CASE("dual feasibility: box constraints and the equality constraint") {
  const Blobs data = make_blobs(15, 77, 4.0);
  const double c = 2.5;
  const clf::SvmModel model = clf::svm_train(data.x, data.y, c, 0.3);

  double sum_ay = 0.0;
  int pos_sv = 0, neg_sv = 0;
  for (const double coef : model.dual_coefs) {
    const double alpha = std::fabs(coef);
    CHECK(alpha > 0.0);
    CHECK(alpha <= c + 1e-12);
    sum_ay += coef;
    (coef > 0 ? pos_sv : neg_sv)++;
  }
  CHECK(std::fabs(sum_ay) <= 1e-6);
  CHECK(pos_sv >= 1);
  CHECK(neg_sv >= 1);
}

TEST_CASE("free support vectors sit on the margin within the KKT tolerance") {
  const Blobs data = make_blobs(25, 5, 3.0);
  const double c = 5.0, tol = 1e-4;
  const clf::SvmModel model = clf::svm_train(data.x, data.y, c, 0.2, tol);
  int checked = 0;
  for (size_t i = 0; i < model.support_vectors.size(); ++i) {
    const double alpha = std::fabs(model.dual_coefs[i]);
    if (alpha < 1e-8 || alpha > c - 1e-8) continue;
    CHECK(std::fabs(std::fabs(clf::svm_score(model, model.support_vectors[i])) - 1.0) <
          5.0 * tol);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("duplicating every training point leaves the decision function intact") {
  const Blobs data = make_blobs(12, 13, 6.0);
  Blobs doubled = data;
  doubled.x.insert(doubled.x.end(), data.x.begin(), data.x.end());
  doubled.y.insert(doubled.y.end(), data.y.begin(), data.y.end());

  const clf::SvmModel a = clf::svm_train(data.x, data.y, 3.0, 0.25, 1e-8);
  const clf::SvmModel b = clf::svm_train(doubled.x, doubled.y, 3.0, 0.25, 1e-8);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 9.0);
  for (int probe = 0; probe < 25; ++probe) {
    const std::vector<double> p{u(rng), u(rng)};
    CHECK(clf::svm_score(a, p) == doctest::Approx(clf::svm_score(b, p)).epsilon(1e-6));
  }
}

TEST_CASE("decision values are invariant to permuting the training order") {
  const Blobs data = make_blobs(15, 99, 5.0);
  Blobs shuffled = data;
  std::mt19937_64 rng(1);
  std::vector<size_t> perm(data.x.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (size_t i = 0; i < perm.size(); ++i) {
    shuffled.x[i] = data.x[perm[i]];
    shuffled.y[i] = data.y[perm[i]];
  }

  const clf::SvmModel a = clf::svm_train(data.x, data.y, 2.0, 0.3, 1e-8);
  const clf::SvmModel b = clf::svm_train(shuffled.x, shuffled.y, 2.0, 0.3, 1e-8);
  std::uniform_real_distribution<double> u(-3.0, 8.0);
  for (int probe = 0; probe < 25; ++probe) {
    const std::vector<double> p{u(rng), u(rng)};
    CHECK(clf::svm_score(a, p) == doctest::Approx(clf::svm_score(b, p)).epsilon(1e-6));
  }
}

TEST_CASE("gaussian kernel: unit diagonal, symmetry, positive semidefinite") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::vector<double>> pts(20, std::vector<double>(5));
  for (auto &p : pts)
    for (auto &v : p) v = u(rng);

  std::vector<std::vector<double>> kmat(20, std::vector<double>(20));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) kmat[i][j] = clf::gaussian_kernel(pts[i], pts[j], 0.7);

  for (int i = 0; i < 20; ++i) {
    CHECK(kmat[i][i] == 1.0);
    for (int j = 0; j < 20; ++j) CHECK(kmat[i][j] == doctest::Approx(kmat[j][i]));
  }
  const std::vector<double> eig = symmetric_eigenvalues(kmat);
  for (const double e : eig) CHECK(e > -1e-8);
}

TEST_CASE("svm_train rejects bad input") {
  const Blobs data = make_blobs(10, 3);
  std::vector<int> one_class(data.y.size(), 1);
  CHECK_THROWS_AS(clf::svm_train(data.x, one_class, 1.0, 1.0), ValueError);

  auto bad = data.x;
  bad[0][0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(clf::svm_train(bad, data.y, 1.0, 1.0), ValueError);
  CHECK_THROWS_AS(clf::svm_score(clf::svm_train(data.x, data.y, 1.0, 0.5), {1.0}),
                  ShapeError);
}

TEST_CASE("platt: symmetric scores calibrate to one half at zero") {
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    scores.push_back(-5.0);
    labels.push_back(-1);
    scores.push_back(5.0);
    labels.push_back(1);
  }
  const auto [a, b] = clf::platt_calibrate(scores, labels);
  CHECK(a < 0.0);
  CHECK(clf::platt_probability(0.0, a, b) == doctest::Approx(0.5).epsilon(1e-6));

  // monotone in the raw score when A < 0
  double prev = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double p = clf::platt_probability(-5.0 + 0.5 * i, a, b);
    if (i > 0) CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("platt calibration beats the constant-0.5 predictor on log-loss") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 120; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    scores.push_back(1.3 * y + g(rng));
    labels.push_back(y);
  }
  const auto [a, b] = clf::platt_calibrate(scores, labels);
  double log_loss = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const double p = clf::platt_probability(scores[i], a, b);
    log_loss += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  log_loss /= static_cast<double>(scores.size());
  CHECK(log_loss <= std::log(2.0));

  CHECK_THROWS_AS(clf::platt_calibrate({1.0, 2.0}, std::vector<int>{1, 1}), ValueError);
}

TEST_CASE("mlp separates standardized blobs within the epoch budget") {
  const Blobs data = make_blobs(20, 23, 8.0);
  const clf::Standardizer scaler = clf::Standardizer::fit(data.x);
  const auto x = scaler.transform_all(data.x);
  clf::MlpConfig config;  // spec-default hidden sizes 128/64, dropout 0.3
  config.max_epochs = 200;
  const clf::MlpModel model = clf::mlp_train(x, data.y, config, 7);
  int correct = 0;
  for (size_t i = 0; i < x.size(); ++i)
    if (clf::mlp_predict(model, x[i]) == data.y[i]) ++correct;
  CHECK(correct == 40);
}

TEST_CASE("zero output weights give probability exactly one half") {
  clf::MlpModel model;
  model.fc1 = nn::LayerParams::dense(3, 4);
  model.fc2 = nn::LayerParams::dense(4, 4);
  model.fc3 = nn::LayerParams::dense(4, 2);  // zero weights and biases
  CHECK(clf::mlp_score(model, {0.3, -0.2, 0.9}) == 0.5);
}

TEST_CASE("mlp probabilities are shift-invariant in the output logits") {
  const Blobs data = make_blobs(8, 2, 4.0);
  clf::MlpConfig config;
  config.hidden1 = 8;
  config.hidden2 = 4;
  config.max_epochs = 30;
  clf::MlpModel model = clf::mlp_train(data.x, data.y, config, 3);

  const double before = clf::mlp_score(model, data.x[0]);
  CHECK(before > 0.0);
  CHECK(before < 1.0);
  for (double &b : model.fc3.bias.data) b += 11.0;  // softmax shift invariance
  CHECK(clf::mlp_score(model, data.x[0]) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("mlp training is deterministic given the seed") {
  const Blobs data = make_blobs(10, 6, 5.0);
  clf::MlpConfig config;
  config.hidden1 = 8;
  config.hidden2 = 4;
  config.max_epochs = 20;
  const clf::MlpModel a = clf::mlp_train(data.x, data.y, config, 99);
  const clf::MlpModel b = clf::mlp_train(data.x, data.y, config, 99);
  CHECK(a.fc1.weight.data == b.fc1.weight.data);
  CHECK(a.fc3.weight.data == b.fc3.weight.data);
}

TEST_CASE("early fusion concatenates streams in a fixed order") {
  const std::vector<double> wide(320, 1.0), narrow(384, 2.0);
  const std::vector<double> fused = clf::early_fuse({wide, narrow});
  REQUIRE(fused.size() == 704);
  CHECK(fused[0] == 1.0);
  CHECK(fused[319] == 1.0);
  CHECK(fused[320] == 2.0);

  CHECK(clf::early_fuse({wide}) == wide);
  CHECK(clf::early_fuse({wide, narrow}) == clf::early_fuse({wide, narrow}));
  CHECK_THROWS_AS(clf::early_fuse({wide, {}}), ValueError);
}

TEST_CASE("hinge-SGD fusion favours the informative stream") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<int> labels;
  std::vector<double> informative, noise;
  for (int i = 0; i < 60; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    labels.push_back(y);
    informative.push_back(static_cast<double>(y));
    noise.push_back(g(rng));
  }
  const clf::FusionWeights w = clf::learn_fusion_weights({informative, noise}, labels, 5);
  CHECK(std::fabs(w.weights[0]) > std::fabs(w.weights[1]));

  // the informative stream dominates the fused decision
  int correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double fused = clf::late_fuse(w, {informative[i], noise[i]});
    if ((fused > 0 ? 1 : -1) == labels[i]) ++correct;
  }
  CHECK(correct == 60);
}

TEST_CASE("single-stream fusion keeps a nonzero weight and the score sign") {
  std::vector<int> labels;
  std::vector<double> scores;
  for (int i = 0; i < 40; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    labels.push_back(y);
    scores.push_back(0.8 * y);
  }
  const clf::FusionWeights w = clf::learn_fusion_weights({scores}, labels, 3);
  REQUIRE(w.weights.size() == 1);
  CHECK(w.weights[0] != 0.0);
  for (size_t i = 0; i < scores.size(); ++i) {
    const double fused = clf::late_fuse(w, {scores[i]});
    const int sign = fused > 0 ? 1 : -1;
    const int expected = (w.weights[0] > 0 ? 1 : -1) * (scores[i] > 0 ? 1 : -1);
    CHECK(sign == expected);
  }
}

TEST_CASE("duplicating a stream leaves fused training decisions unchanged") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<int> labels;
  std::vector<double> s1, s2;
  for (int i = 0; i < 50; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    labels.push_back(y);
    s1.push_back(y + g(rng));
    s2.push_back(0.5 * y + g(rng));
  }
  const clf::FusionWeights w2 = clf::learn_fusion_weights({s1, s2}, labels, 9);
  const clf::FusionWeights w3 = clf::learn_fusion_weights({s1, s2, s2}, labels, 9);
  for (size_t i = 0; i < labels.size(); ++i) {
    const double a = clf::late_fuse(w2, {s1[i], s2[i]});
    const double b = clf::late_fuse(w3, {s1[i], s2[i], s2[i]});
    CHECK((a > 0) == (b > 0));
  }
}

TEST_CASE("scaling all stream scores by a positive constant keeps decisions") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 0.4);
  std::vector<int> labels;
  std::vector<double> s1, s2;
  for (int i = 0; i < 50; ++i) {
    const int y = (i % 2 == 0) ? 1 : -1;
    labels.push_back(y);
    s1.push_back(0.9 * y + g(rng));
    s2.push_back(0.6 * y + g(rng));
  }
  auto s1s = s1, s2s = s2;
  for (double &v : s1s) v *= 4.0;
  for (double &v : s2s) v *= 4.0;

  const clf::FusionWeights w = clf::learn_fusion_weights({s1, s2}, labels, 2);
  const clf::FusionWeights ws = clf::learn_fusion_weights({s1s, s2s}, labels, 2);
  for (size_t i = 0; i < labels.size(); ++i) {
    const double a = clf::late_fuse(w, {s1[i], s2[i]});
    const double b = clf::late_fuse(ws, {s1s[i], s2s[i]});
    CHECK((a > 0) == (b > 0));
  }
}

TEST_CASE("fusion rejects degenerate all-constant scores") {
  std::vector<int> labels{1, -1, 1, -1};
  std::vector<double> flat(4, 0.7);
  CHECK_THROWS_AS(clf::learn_fusion_weights({flat, flat}, labels, 1), ValueError);
}

TEST_CASE("standardizer: zero mean, unit variance, constant features safe") {
  const std::vector<std::vector<double>> rows{{1.0, 5.0, 2.0}, {3.0, 5.0, 4.0},
                                              {5.0, 5.0, 9.0}};
  const clf::Standardizer s = clf::Standardizer::fit(rows);
  const auto scaled = s.transform_all(rows);
  for (size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (const auto &row : scaled) mean += row[j];
    CHECK(std::fabs(mean) < 1e-12);
  }
  for (const auto &row : scaled) CHECK(row[1] == 0.0);  // constant feature

  CHECK_THROWS_AS(s.transform({1.0}), ShapeError);
  CHECK_THROWS_AS(clf::Standardizer::fit({}), ValueError);
}

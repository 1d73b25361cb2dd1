// core/src/mlp.cpp

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

#include "mspec/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "mspec/errors.hpp"
#include "mspec/rng.hpp"

namespace mspec::clf {

using nn::LayerParams;
using nn::Tensor;

namespace {

Tensor rows_to_tensor(const std::vector<std::vector<double>> &rows,
                      const std::vector<int> &order, size_t first, size_t last) {
  const int dim = static_cast<int>(rows[0].size());
  Tensor t({static_cast<int>(last - first), dim});
  for (size_t i = first; i < last; ++i) {
    const auto &row = rows[static_cast<size_t>(order[i])];
    std::copy(row.begin(), row.end(), t.data.begin() + static_cast<int64_t>(i - first) * dim);
  }
  return t;
}

void relu_inplace(Tensor &t) {
  for (double &v : t.data) v = std::max(v, 0.0);
}

// forward through the three layers; when rng != nullptr applies inverted
// dropout after each hidden ReLU and reports the masks
struct HiddenActs {
  Tensor x, h1, h1d, h2, h2d, logits;
  std::vector<double> mask1, mask2;
};

HiddenActs mlp_forward(const MlpModel &model, Tensor x, Rng *rng, double dropout) {
  HiddenActs a;
  a.x = std::move(x);
  a.h1 = nn::dense_forward(model.fc1, a.x);
  relu_inplace(a.h1);
  a.h1d = a.h1;
  if (rng != nullptr && dropout > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    a.mask1.resize(a.h1d.data.size());
    const double keep = 1.0 - dropout;
    for (size_t i = 0; i < a.h1d.data.size(); ++i) {
      a.mask1[i] = (u(*rng) < keep) ? 1.0 / keep : 0.0;
      a.h1d.data[i] *= a.mask1[i];
    }
  }
  a.h2 = nn::dense_forward(model.fc2, a.h1d);
  relu_inplace(a.h2);
  a.h2d = a.h2;
  if (rng != nullptr && dropout > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    a.mask2.resize(a.h2d.data.size());
    const double keep = 1.0 - dropout;
    for (size_t i = 0; i < a.h2d.data.size(); ++i) {
      a.mask2[i] = (u(*rng) < keep) ? 1.0 / keep : 0.0;
      a.h2d.data[i] *= a.mask2[i];
    }
  }
  a.logits = nn::dense_forward(model.fc3, a.h2d);
  return a;
}

double accuracy_on(const MlpModel &model, const std::vector<std::vector<double>> &x,
                   const std::vector<int> &y) {
  if (x.empty()) return 0.0;
  int correct = 0;
  for (size_t i = 0; i < x.size(); ++i)
    if (mlp_predict(model, x[i]) == y[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(x.size());
}

}  // namespace

MlpModel mlp_train(const std::vector<std::vector<double>> &features,
                   const std::vector<int> &labels, const MlpConfig &config, uint64_t seed,
                   int epochs, const std::vector<std::vector<double>> *valid_features,
                   const std::vector<int> *valid_labels,
                   std::vector<double> *valid_accuracy_curve) {
  if (features.empty() || features.size() != labels.size())
    throw ValueError("mlp_train: features/labels mismatch");
  int n_pos = 0, n_neg = 0;
  for (const int y : labels) {
    if (y == 1) ++n_pos;
    else if (y == -1) ++n_neg;
    else throw ValueError("mlp_train: labels must be +1 or -1");
  }
  if (n_pos < 2 || n_neg < 2) throw ValueError("mlp_train: need at least 2 samples per class");
  for (const auto &row : features)
    for (const double v : row)
      if (!std::isfinite(v)) throw ValueError("mlp_train: non-finite feature value");

  const int dim = static_cast<int>(features[0].size());
  MlpModel model;
  model.dropout = config.dropout;
  model.fc1 = LayerParams::dense(dim, config.hidden1);
  model.fc2 = LayerParams::dense(config.hidden1, config.hidden2);
  model.fc3 = LayerParams::dense(config.hidden2, 2);

  {
    Rng init_rng = make_rng(seed, "mlp_init");
    for (LayerParams *l : {&model.fc1, &model.fc2, &model.fc3}) {
      const double bound = std::sqrt(6.0 / l->in_dim);
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double &w : l->weight.data) w = dist(init_rng);
    }
  }

  std::vector<Tensor *> params{&model.fc1.weight, &model.fc1.bias, &model.fc2.weight,
                               &model.fc2.bias,   &model.fc3.weight, &model.fc3.bias};
  nn::AdamState adam = nn::AdamState::init(
      std::vector<const Tensor *>(params.begin(), params.end()), config.learning_rate);

  Rng shuffle_rng = make_rng(seed, "mlp_shuffle");
  Rng dropout_rng = make_rng(seed, "mlp_dropout");

  std::vector<int> order(features.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  const int n_epochs = epochs > 0 ? epochs : config.max_epochs;
  const size_t bs = static_cast<size_t>(std::max(config.batch_size, 1));
  for (int epoch = 0; epoch < n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (size_t first = 0; first < features.size(); first += bs) {
      const size_t last = std::min(first + bs, features.size());
      const int nb = static_cast<int>(last - first);
      Tensor x = rows_to_tensor(features, order, first, last);
      HiddenActs acts = mlp_forward(model, std::move(x), &dropout_rng, config.dropout);

      // softmax cross-entropy gradient on the logits
      Tensor dz({nb, 2});
      for (int i = 0; i < nb; ++i) {
        const double z0 = acts.logits.data[2 * i], z1 = acts.logits.data[2 * i + 1];
        const double zmax = std::max(z0, z1);
        const double e0 = std::exp(z0 - zmax), e1 = std::exp(z1 - zmax);
        const double p1 = e1 / (e0 + e1);
        const int target = labels[static_cast<size_t>(order[first + i])] == 1 ? 1 : 0;
        dz.data[2 * i] = ((1.0 - p1) - (target == 0 ? 1.0 : 0.0)) / nb;
        dz.data[2 * i + 1] = (p1 - (target == 1 ? 1.0 : 0.0)) / nb;
      }

      Tensor dw3, db3, dh2d;
      nn::dense_backward(model.fc3, acts.h2d, dz, dw3, db3, dh2d);
      if (!acts.mask2.empty())
        for (size_t i = 0; i < dh2d.data.size(); ++i) dh2d.data[i] *= acts.mask2[i];
      for (size_t i = 0; i < dh2d.data.size(); ++i)
        if (acts.h2.data[i] <= 0.0) dh2d.data[i] = 0.0;

      Tensor dw2, db2, dh1d;
      nn::dense_backward(model.fc2, acts.h1d, dh2d, dw2, db2, dh1d);
      if (!acts.mask1.empty())
        for (size_t i = 0; i < dh1d.data.size(); ++i) dh1d.data[i] *= acts.mask1[i];
      for (size_t i = 0; i < dh1d.data.size(); ++i)
        if (acts.h1.data[i] <= 0.0) dh1d.data[i] = 0.0;

      Tensor dw1, db1, dx;
      nn::dense_backward(model.fc1, acts.x, dh1d, dw1, db1, dx);

      std::vector<const Tensor *> grads{&dw1, &db1, &dw2, &db2, &dw3, &db3};
      nn::adam_step(adam, params, grads);
    }

    if (valid_features != nullptr && valid_labels != nullptr &&
        valid_accuracy_curve != nullptr)
      valid_accuracy_curve->push_back(accuracy_on(model, *valid_features, *valid_labels));
  }
  return model;
}

double mlp_score(const MlpModel &model, const std::vector<double> &x) {
  if (static_cast<int>(x.size()) != model.fc1.in_dim)
    throw ShapeError("mlp_score: dimension mismatch");
  Tensor t({1, model.fc1.in_dim});
  std::copy(x.begin(), x.end(), t.data.begin());
  HiddenActs acts = mlp_forward(model, std::move(t), nullptr, 0.0);
  const double z0 = acts.logits.data[0], z1 = acts.logits.data[1];
  const double zmax = std::max(z0, z1);
  const double e0 = std::exp(z0 - zmax), e1 = std::exp(z1 - zmax);
  return e1 / (e0 + e1);
}

int mlp_predict(const MlpModel &model, const std::vector<double> &x) {
  return mlp_score(model, x) > 0.5 ? 1 : -1;
}

}  // namespace mspec::clf

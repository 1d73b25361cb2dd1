// tests/unit/test_nn.cpp

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

#include <cmath>
#include <random>

#include "mspec/nn.hpp"

using namespace mspec;
using nn::LayerParams;
using nn::ModelGraph;
using nn::Tensor;
using nn::TensorMap;

namespace {

Tensor filled(std::vector<int> shape, const std::vector<double> &values) {
  Tensor t(std::move(shape));
  REQUIRE(static_cast<size_t>(t.numel()) == values.size());
  t.data = values;
  return t;
}

void randomize(Tensor &t, std::mt19937_64 &rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double &v : t.data) v = u(rng);
}

// total loss = sum over outputs of mse(out, target); gradients seeded from
// the same expression
double graph_loss(const ModelGraph &graph, const TensorMap &inputs,
                  const TensorMap &targets, TensorMap *loss_grads = nullptr) {
  const TensorMap acts = nn::forward(graph, inputs);
  double total = 0.0;
  for (const auto &[name, target] : targets) {
    const auto [loss, grad] = nn::mse_loss(acts.at(name), target);
    total += loss;
    if (loss_grads != nullptr) (*loss_grads)[name] = grad;
  }
  return total;
}

// exercises analytic vs central-difference gradients on a small graph
void gradient_check(ModelGraph &graph, const TensorMap &inputs, const TensorMap &targets,
                    double step = 1e-3, double tol = 1e-4) {
  TensorMap loss_grads;
  const TensorMap acts = nn::forward(graph, inputs);
  for (const auto &[name, target] : targets)
    loss_grads[name] = nn::mse_loss(acts.at(name), target).second;
  const nn::GraphGradients grads = nn::backward(graph, acts, loss_grads);

  for (size_t node = 0; node < graph.nodes.size(); ++node) {
    if (!graph.nodes[node].layer.has_params()) continue;
    for (const bool is_weight : {true, false}) {
      Tensor &param = is_weight ? graph.nodes[node].layer.weight : graph.nodes[node].layer.bias;
      const Tensor &analytic =
          is_weight ? grads.weight_grads[node] : grads.bias_grads[node];
      for (size_t j = 0; j < param.data.size(); ++j) {
        const double saved = param.data[j];
        param.data[j] = saved + step;
        const double up = graph_loss(graph, inputs, targets);
        param.data[j] = saved - step;
        const double down = graph_loss(graph, inputs, targets);
        param.data[j] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::fabs(numeric), std::fabs(analytic.data[j]), 1.0});
        CHECK(std::fabs(numeric - analytic.data[j]) / denom < tol);
      }
    }
  }
}

ModelGraph two_conv_graph(std::mt19937_64 &rng) {
  ModelGraph g;
  g.input_names = {"x"};
  LayerParams c1 = LayerParams::conv2d(1, 2, 3, 2, 1);
  LayerParams c2 = LayerParams::conv2d(2, 3, 3, 1, 0);
  randomize(c1.weight, rng);
  randomize(c1.bias, rng, 0.1);
  randomize(c2.weight, rng);
  randomize(c2.bias, rng, 0.1);
  g.nodes.push_back({"c1", c1, {"x"}, {"h"}});
  g.nodes.push_back({"r1", LayerParams::relu(), {"h"}, {"hr"}});
  g.nodes.push_back({"c2", c2, {"hr"}, {"y"}});
  g.output_names = {"y"};
  return g;
}

}  // namespace

TEST_CASE("conv2d: scalar 1x1 kernel acts pointwise") {
  ModelGraph g;
  g.input_names = {"x"};
  LayerParams conv = LayerParams::conv2d(1, 1, 1, 1, 0);
  conv.weight.data = {2.0};
  conv.bias.data = {0.0};
  g.nodes.push_back({"conv", conv, {"x"}, {"y"}});
  g.output_names = {"y"};

  const TensorMap acts = nn::forward(g, {{"x", filled({1, 1, 2, 2}, {1, 1, 1, 1})}});
  for (const double v : acts.at("y").data) CHECK(v == 2.0);
}

TEST_CASE("conv2d: 2x2 kernel of ones sums the window") {
  ModelGraph g;
  g.input_names = {"x"};
  LayerParams conv = LayerParams::conv2d(1, 1, 2, 1, 0);
  conv.weight.data = {1.0, 1.0, 1.0, 1.0};
  g.nodes.push_back({"conv", conv, {"x"}, {"y"}});
  g.output_names = {"y"};

  const TensorMap acts = nn::forward(g, {{"x", filled({1, 1, 2, 2}, {1, 2, 3, 4})}});
  REQUIRE(acts.at("y").shape == std::vector<int>{1, 1, 1, 1});
  CHECK(acts.at("y").data[0] == 10.0);
}

TEST_CASE("conv output dims follow floor((in + 2p - k)/s) + 1") {
  CHECK(nn::conv_out_dim(128, 3, 2, 1) == 64);
  CHECK(nn::conv_out_dim(126, 3, 2, 1) == 63);
  CHECK(nn::conv_out_dim(63, 3, 2, 1) == 32);
  CHECK(nn::conv_transpose_out_dim(8, 3, 2, 1, 1) == 16);
  CHECK(nn::conv_transpose_out_dim(32, 3, 2, 1, 0) == 63);
}

TEST_CASE("concat joins channels and split inverts it bit-exactly") {
  ModelGraph g;
  g.input_names = {"a", "b"};
  g.nodes.push_back({"cat", LayerParams::concat(), {"a", "b"}, {"ab"}});
  g.nodes.push_back({"split", LayerParams::split({16, 16}), {"ab"}, {"a2", "b2"}});
  g.output_names = {"a2", "b2"};

  std::mt19937_64 rng(7);
  Tensor a({2, 16, 3, 3}), b({2, 16, 3, 3});
  randomize(a, rng);
  randomize(b, rng);
  const TensorMap acts = nn::forward(g, {{"a", a}, {"b", b}});
  CHECK(acts.at("ab").dim(1) == 32);
  CHECK(acts.at("a2").data == a.data);
  CHECK(acts.at("b2").data == b.data);
}

TEST_CASE("shape mismatch errors name the offending layer") {
  ModelGraph g;
  g.input_names = {"x"};
  g.nodes.push_back({"badconv", LayerParams::conv2d(3, 4, 3, 1, 0), {"x"}, {"y"}});
  g.output_names = {"y"};
  try {
    nn::forward(g, {{"x", Tensor({1, 1, 6, 6})}});
    FAIL("expected ShapeError");
  } catch (const ShapeError &e) {
    CHECK(std::string(e.what()).find("badconv") != std::string::npos);
  }
}

TEST_CASE("dense gradient matches the hand-computed outer product") {
  // y = W x with W = I2, x = [1, 2]; for loss 1/2 ||y||^2 the weight
  // gradient is y x^T = [[1, 2], [2, 4]]
  ModelGraph g;
  g.input_names = {"x"};
  LayerParams fc = LayerParams::dense(2, 2);
  fc.weight.data = {1.0, 0.0, 0.0, 1.0};
  g.nodes.push_back({"fc", fc, {"x"}, {"y"}});
  g.output_names = {"y"};

  const TensorMap acts = nn::forward(g, {{"x", filled({1, 2}, {1.0, 2.0})}});
  TensorMap loss_grads;
  loss_grads["y"] = acts.at("y");  // d(1/2||y||^2)/dy = y
  const nn::GraphGradients grads = nn::backward(g, acts, loss_grads);
  CHECK(grads.weight_grads[0].data == std::vector<double>{1.0, 2.0, 2.0, 4.0});
}

TEST_CASE("zero loss gradient produces zero parameter gradients") {
  std::mt19937_64 rng(3);
  ModelGraph g = two_conv_graph(rng);
  Tensor x({1, 1, 6, 6});
  randomize(x, rng);
  const TensorMap acts = nn::forward(g, {{"x", x}});
  TensorMap loss_grads;
  loss_grads["y"] = Tensor(acts.at("y").shape);
  const nn::GraphGradients grads = nn::backward(g, acts, loss_grads);
  for (const auto &t : grads.weight_grads)
    for (const double v : t.data) CHECK(v == 0.0);
}

TEST_CASE("backward is linear in the loss gradient") {
  std::mt19937_64 rng(21);
  ModelGraph g = two_conv_graph(rng);
  Tensor x({1, 1, 6, 6});
  randomize(x, rng);
  const TensorMap acts = nn::forward(g, {{"x", x}});
  Tensor seed(acts.at("y").shape);
  randomize(seed, rng);

  TensorMap g1{{"y", seed}};
  Tensor scaled = seed;
  for (double &v : scaled.data) v *= 3.5;
  TensorMap g2{{"y", scaled}};

  const nn::GraphGradients a = nn::backward(g, acts, g1);
  const nn::GraphGradients b = nn::backward(g, acts, g2);
  for (size_t n = 0; n < a.weight_grads.size(); ++n)
    for (size_t j = 0; j < a.weight_grads[n].data.size(); ++j)
      CHECK(b.weight_grads[n].data[j] ==
            doctest::Approx(3.5 * a.weight_grads[n].data[j]).epsilon(1e-12));
}

TEST_CASE("backward without retained activations is rejected") {
  std::mt19937_64 rng(5);
  ModelGraph g = two_conv_graph(rng);
  Tensor x({1, 1, 6, 6});
  randomize(x, rng);
  const TensorMap acts = nn::forward(g, {{"x", x}});
  TensorMap truncated;  // keep only the final output
  truncated["y"] = acts.at("y");
  TensorMap loss_grads{{"y", Tensor(acts.at("y").shape)}};
  loss_grads["y"].data.assign(loss_grads["y"].data.size(), 1.0);
  CHECK_THROWS_AS(nn::backward(g, truncated, loss_grads), ValueError);
}

TEST_CASE("gradient check: conv/relu/conv graph") {
  std::mt19937_64 rng(101);
  ModelGraph g = two_conv_graph(rng);
  Tensor x({2, 1, 6, 6});
  randomize(x, rng);
  const TensorMap acts = nn::forward(g, {{"x", x}});
  Tensor target(acts.at("y").shape);
  randomize(target, rng);
  gradient_check(g, {{"x", x}}, {{"y", target}});
}

TEST_CASE("gradient check: transposed conv and sigmoid") {
  std::mt19937_64 rng(202);
  ModelGraph g;
  g.input_names = {"x"};
  LayerParams up = LayerParams::conv_transpose2d(2, 1, 3, 2, 1, 1, 0);
  randomize(up.weight, rng);
  randomize(up.bias, rng, 0.1);
  g.nodes.push_back({"up", up, {"x"}, {"h"}});
  g.nodes.push_back({"sig", LayerParams::sigmoid(), {"h"}, {"y"}});
  g.output_names = {"y"};

  Tensor x({2, 2, 4, 5});
  randomize(x, rng);
  const TensorMap acts = nn::forward(g, {{"x", x}});
  Tensor target(acts.at("y").shape);
  randomize(target, rng);
  gradient_check(g, {{"x", x}}, {{"y", target}});
}

TEST_CASE("gradient check: branch/concat/split autoencoder-like graph") {
  std::mt19937_64 rng(303);
  ModelGraph g;
  g.input_names = {"a", "b"};
  LayerParams ca = LayerParams::conv2d(1, 2, 3, 2, 1);
  LayerParams cb = LayerParams::conv2d(1, 2, 3, 2, 1);
  randomize(ca.weight, rng);
  randomize(cb.weight, rng);
  g.nodes.push_back({"ca", ca, {"a"}, {"ha"}});
  g.nodes.push_back({"cb", cb, {"b"}, {"hb"}});
  g.nodes.push_back({"cat", LayerParams::concat(), {"ha", "hb"}, {"h"}});
  g.nodes.push_back({"split", LayerParams::split({2, 2}), {"h"}, {"sa", "sb"}});
  LayerParams ua = LayerParams::conv_transpose2d(2, 1, 3, 2, 1, 1, 1);
  LayerParams ub = LayerParams::conv_transpose2d(2, 1, 3, 2, 1, 1, 1);
  randomize(ua.weight, rng);
  randomize(ub.weight, rng);
  g.nodes.push_back({"ua", ua, {"sa"}, {"ya"}});
  g.nodes.push_back({"ub", ub, {"sb"}, {"yb"}});
  g.output_names = {"ya", "yb"};

  Tensor a({1, 1, 6, 6}), b({1, 1, 6, 6});
  randomize(a, rng);
  randomize(b, rng);
  const TensorMap acts = nn::forward(g, {{"a", a}, {"b", b}});
  Tensor ta(acts.at("ya").shape), tb(acts.at("yb").shape);
  randomize(ta, rng);
  randomize(tb, rng);
  gradient_check(g, {{"a", a}, {"b", b}}, {{"ya", ta}, {"yb", tb}});
}

TEST_CASE("gradient check: dense/flatten/reshape stack") {
  std::mt19937_64 rng(404);
  ModelGraph g;
  g.input_names = {"x"};
  g.nodes.push_back({"flat", LayerParams::flatten(), {"x"}, {"xf"}});
  LayerParams fc1 = LayerParams::dense(12, 7);
  LayerParams fc2 = LayerParams::dense(7, 12);
  randomize(fc1.weight, rng);
  randomize(fc1.bias, rng, 0.1);
  randomize(fc2.weight, rng);
  randomize(fc2.bias, rng, 0.1);
  g.nodes.push_back({"fc1", fc1, {"xf"}, {"h"}});
  g.nodes.push_back({"relu", LayerParams::relu(), {"h"}, {"hr"}});
  g.nodes.push_back({"fc2", fc2, {"hr"}, {"hd"}});
  g.nodes.push_back({"back", LayerParams::reshape({3, 2, 2}), {"hd"}, {"y"}});
  g.output_names = {"y"};

  Tensor x({3, 3, 2, 2});
  randomize(x, rng);
  const TensorMap acts = nn::forward(g, {{"x", x}});
  Tensor target(acts.at("y").shape);
  randomize(target, rng);
  gradient_check(g, {{"x", x}}, {{"y", target}});
}

TEST_CASE("relu and sigmoid ranges; sigmoid(0) is exactly one half") {
  ModelGraph g;
  g.input_names = {"x"};
  g.nodes.push_back({"r", LayerParams::relu(), {"x"}, {"xr"}});
  g.nodes.push_back({"s", LayerParams::sigmoid(), {"x"}, {"xs"}});
  g.output_names = {"xr", "xs"};

  Tensor x = filled({1, 5}, {-2.0, -0.5, 0.0, 0.5, 2.0});
  const TensorMap acts = nn::forward(g, {{"x", x}});
  for (const double v : acts.at("xr").data) CHECK(v >= 0.0);
  for (const double v : acts.at("xs").data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK(acts.at("xs").data[2] == 0.5);
}

TEST_CASE("mse loss: value, zero case, quadratic scaling") {
  const auto [zero_loss, zero_grad] =
      nn::mse_loss(filled({2}, {1.0, 2.0}), filled({2}, {1.0, 2.0}));
  CHECK(zero_loss == 0.0);
  for (const double v : zero_grad.data) CHECK(v == 0.0);

  const auto [loss, grad] = nn::mse_loss(filled({2}, {1.0, 1.0}), filled({2}, {0.0, 2.0}));
  CHECK(loss == doctest::Approx(1.0));
  CHECK(grad.data[0] == doctest::Approx(1.0));   // 2 * (1 - 0) / 2
  CHECK(grad.data[1] == doctest::Approx(-1.0));

  const auto [loss3, grad3] = nn::mse_loss(filled({2}, {3.0, 3.0}), filled({2}, {0.0, 6.0}));
  (void)grad3;
  CHECK(loss3 == doctest::Approx(9.0 * loss));

  CHECK_THROWS_AS(nn::mse_loss(Tensor({2}), Tensor({3})), ShapeError);
}

TEST_CASE("adam: zero gradients leave parameters unchanged, moments decay") {
  Tensor p = filled({2}, {1.0, -1.0});
  std::vector<Tensor *> params{&p};
  nn::AdamState state = nn::AdamState::init({&p}, 1e-3);

  Tensor g1 = filled({2}, {0.5, -0.5});
  nn::adam_step(state, params, {&g1});
  const double m_after_first = std::fabs(state.m[0].data[0]);

  Tensor zeros({2});
  const Tensor before = p;
  nn::adam_step(state, params, {&zeros});
  CHECK(std::fabs(state.m[0].data[0]) < m_after_first);
  // parameters still move while the first moment decays; a fresh state with
  // zero gradients must leave them untouched
  nn::AdamState fresh = nn::AdamState::init({&p}, 1e-3);
  const Tensor snapshot = p;
  nn::adam_step(fresh, params, {&zeros});
  CHECK(p.data == snapshot.data);
}

TEST_CASE("adam: first step moves each parameter by about the learning rate") {
  Tensor p = filled({3}, {0.0, 0.0, 0.0});
  nn::AdamState state = nn::AdamState::init({&p}, 1e-3);
  Tensor g = filled({3}, {0.2, -4.0, 1e-3});
  nn::adam_step(state, {&p}, {&g});
  CHECK(state.step == 1);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::fabs(p.data[j]) == doctest::Approx(1e-3).epsilon(1e-3));
    CHECK(std::signbit(p.data[j]) != std::signbit(g.data[j]));
  }
}

TEST_CASE("adam: identical gradient histories give identical updates") {
  Tensor p1 = filled({2}, {0.3, 0.3});
  Tensor p2 = p1;
  nn::AdamState state = nn::AdamState::init({&p1, &p2}, 1e-3);
  std::mt19937_64 rng(9);
  for (int step = 0; step < 5; ++step) {
    Tensor g({2});
    randomize(g, rng);
    Tensor g_copy = g;
    nn::adam_step(state, {&p1, &p2}, {&g, &g_copy});
  }
  CHECK(p1.data == p2.data);
}

TEST_CASE("adam rejects non-finite gradients") {
  Tensor p = filled({1}, {0.0});
  nn::AdamState state = nn::AdamState::init({&p}, 1e-3);
  Tensor g = filled({1}, {std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_AS(nn::adam_step(state, {&p}, {&g}), ValueError);
}

TEST_CASE("seeded initialization is deterministic and respects fan-in bounds") {
  std::mt19937_64 rng(1);
  ModelGraph a = two_conv_graph(rng);
  std::mt19937_64 rng2(1);
  ModelGraph b = two_conv_graph(rng2);
  nn::init_parameters(a, 77);
  nn::init_parameters(b, 77);
  for (size_t n = 0; n < a.nodes.size(); ++n)
    CHECK(a.nodes[n].layer.weight.data == b.nodes[n].layer.weight.data);

  const double bound = std::sqrt(6.0 / (1 * 3 * 3));
  for (const double w : a.nodes[0].layer.weight.data) CHECK(std::fabs(w) <= bound);
  for (const double v : a.nodes[0].layer.bias.data) CHECK(v == 0.0);
}

TEST_CASE("graph validation catches cycles and duplicate producers") {
  ModelGraph g;
  g.input_names = {"x"};
  g.nodes.push_back({"r1", LayerParams::relu(), {"missing"}, {"y"}});
  g.output_names = {"y"};
  CHECK_THROWS_AS(g.validate(), ValueError);

  ModelGraph dup;
  dup.input_names = {"x"};
  dup.nodes.push_back({"r1", LayerParams::relu(), {"x"}, {"y"}});
  dup.nodes.push_back({"r2", LayerParams::relu(), {"x"}, {"y"}});
  CHECK_THROWS_AS(dup.validate(), ValueError);
}

// core/include/mspec/nn.hpp

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

#ifndef MSPEC_NN_HPP_
#define MSPEC_NN_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mspec/tensor.hpp"

namespace mspec::nn {

enum class LayerKind {
  kConv2d,
  kConvTranspose2d,
  kDense,
  kRelu,
  kSigmoid,
  kFlatten,
  kReshape,
  kConcat,
  kSplit,
};

std::string layer_kind_name(LayerKind kind);

// Parameters and hyperparameters of one layer. Which fields are meaningful
// depends on kind; weight layouts follow the usual conventions:
//   Conv2d           weight [out_ch, in_ch, kh, kw], bias [out_ch]
//   ConvTranspose2d  weight [in_ch, out_ch, kh, kw], bias [out_ch]
//   Dense            weight [out_dim, in_dim],       bias [out_dim]
struct LayerParams {
  LayerKind kind = LayerKind::kRelu;

  int in_channels = 0, out_channels = 0;
  int kernel_h = 0, kernel_w = 0;
  int stride = 1, pad = 0;
  int out_pad_h = 0, out_pad_w = 0;  // ConvTranspose2d only

  int in_dim = 0, out_dim = 0;  // Dense

  std::vector<int> target_shape;  // Reshape: per-sample shape (no batch dim)
  std::vector<int> split_sizes;   // Split: channel sizes

  Tensor weight, bias;

  bool has_params() const {
    return kind == LayerKind::kConv2d || kind == LayerKind::kConvTranspose2d ||
           kind == LayerKind::kDense;
  }

  static LayerParams conv2d(int in_ch, int out_ch, int kernel, int stride, int pad);
  static LayerParams conv_transpose2d(int in_ch, int out_ch, int kernel, int stride, int pad,
                                      int out_pad_h, int out_pad_w);
  static LayerParams dense(int in_dim, int out_dim);
  static LayerParams relu();
  static LayerParams sigmoid();
  static LayerParams flatten();
  static LayerParams reshape(std::vector<int> target);
  static LayerParams concat();
  static LayerParams split(std::vector<int> sizes);
};

// Conv2d / ConvTranspose2d spatial arithmetic.
int conv_out_dim(int in, int kernel, int stride, int pad);
int conv_transpose_out_dim(int in, int kernel, int stride, int pad, int out_pad);

struct GraphNode {
  std::string name;
  LayerParams layer;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

// A DAG of layers over named tensors. Nodes are stored in topological order;
// validate() checks that order, that each tensor is produced exactly once,
// and that every consumed name is defined.
struct ModelGraph {
  std::vector<GraphNode> nodes;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;  // reconstruction outputs
  std::string bottleneck_name;

  void validate() const;
  int64_t parameter_count() const;
};

using TensorMap = std::map<std::string, Tensor>;

// Runs the graph; the returned map holds the graph inputs plus every node
// output (these retained activations are what backward consumes).
TensorMap forward(const ModelGraph &graph, const TensorMap &inputs);

struct GraphGradients {
  std::vector<Tensor> weight_grads;  // indexed like graph.nodes; empty tensor
  std::vector<Tensor> bias_grads;    // when the node has no parameters
  TensorMap input_grads;
};

// Analytic reverse pass. loss_grads maps output tensor names to dLoss/dOut;
// outputs without an entry contribute zero.
GraphGradients backward(const ModelGraph &graph, const TensorMap &activations,
                        const TensorMap &loss_grads);

// Mean squared error and its gradient w.r.t. the prediction.
std::pair<double, Tensor> mse_loss(const Tensor &prediction, const Tensor &target);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamState {
  int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<Tensor> m;  // one slot per parameter tensor
  std::vector<Tensor> v;

  static AdamState init(const std::vector<const Tensor *> &params, double learning_rate);
  static AdamState init(const ModelGraph &graph, double learning_rate);
};

// Bias-corrected Adam update over an explicit parameter list. Rejects
// non-finite gradients.
void adam_step(AdamState &state, const std::vector<Tensor *> &params,
               const std::vector<const Tensor *> &grads);

// Convenience wrapper updating all graph parameters in node order.
void adam_step(AdamState &state, ModelGraph &graph, const GraphGradients &grads);

// Parameter tensors of a graph in node order (weight, then bias, per node).
std::vector<Tensor *> graph_parameters(ModelGraph &graph);
std::vector<const Tensor *> graph_parameters(const ModelGraph &graph);

// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
void init_parameters(ModelGraph &graph, uint64_t seed);

// ---------------------------------------------------------------------------
// Layer primitives, exposed for the MLP classifier which composes Dense
// layers with dropout masks outside a ModelGraph.
// ---------------------------------------------------------------------------

Tensor dense_forward(const LayerParams &layer, const Tensor &x);
void dense_backward(const LayerParams &layer, const Tensor &x, const Tensor &dy,
                    Tensor &dweight, Tensor &dbias, Tensor &dx);

}  // namespace mspec::nn

#endif  // MSPEC_NN_HPP_

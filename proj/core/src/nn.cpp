// core/src/nn.cpp

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

#include "mspec/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mspec/linalg.hpp"

namespace mspec::nn {

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "Conv2d";
    case LayerKind::kConvTranspose2d: return "ConvTranspose2d";
    case LayerKind::kDense: return "Dense";
    case LayerKind::kRelu: return "ReLU";
    case LayerKind::kSigmoid: return "Sigmoid";
    case LayerKind::kFlatten: return "Flatten";
    case LayerKind::kReshape: return "Reshape";
    case LayerKind::kConcat: return "Concat";
    case LayerKind::kSplit: return "Split";
  }
  return "?";
}

LayerParams LayerParams::conv2d(int in_ch, int out_ch, int kernel, int stride, int pad) {
  LayerParams p;
  p.kind = LayerKind::kConv2d;
  p.in_channels = in_ch;
  p.out_channels = out_ch;
  p.kernel_h = p.kernel_w = kernel;
  p.stride = stride;
  p.pad = pad;
  p.weight = Tensor({out_ch, in_ch, kernel, kernel});
  p.bias = Tensor({out_ch});
  return p;
}

LayerParams LayerParams::conv_transpose2d(int in_ch, int out_ch, int kernel, int stride,
                                          int pad, int out_pad_h, int out_pad_w) {
  LayerParams p;
  p.kind = LayerKind::kConvTranspose2d;
  p.in_channels = in_ch;
  p.out_channels = out_ch;
  p.kernel_h = p.kernel_w = kernel;
  p.stride = stride;
  p.pad = pad;
  p.out_pad_h = out_pad_h;
  p.out_pad_w = out_pad_w;
  p.weight = Tensor({in_ch, out_ch, kernel, kernel});
  p.bias = Tensor({out_ch});
  return p;
}

LayerParams LayerParams::dense(int in_dim, int out_dim) {
  LayerParams p;
  p.kind = LayerKind::kDense;
  p.in_dim = in_dim;
  p.out_dim = out_dim;
  p.weight = Tensor({out_dim, in_dim});
  p.bias = Tensor({out_dim});
  return p;
}

LayerParams LayerParams::relu() {
  LayerParams p;
  p.kind = LayerKind::kRelu;
  return p;
}

LayerParams LayerParams::sigmoid() {
  LayerParams p;
  p.kind = LayerKind::kSigmoid;
  return p;
}

LayerParams LayerParams::flatten() {
  LayerParams p;
  p.kind = LayerKind::kFlatten;
  return p;
}

LayerParams LayerParams::reshape(std::vector<int> target) {
  LayerParams p;
  p.kind = LayerKind::kReshape;
  p.target_shape = std::move(target);
  return p;
}

LayerParams LayerParams::concat() {
  LayerParams p;
  p.kind = LayerKind::kConcat;
  return p;
}

LayerParams LayerParams::split(std::vector<int> sizes) {
  LayerParams p;
  p.kind = LayerKind::kSplit;
  p.split_sizes = std::move(sizes);
  return p;
}

int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

int conv_transpose_out_dim(int in, int kernel, int stride, int pad, int out_pad) {
  return (in - 1) * stride - 2 * pad + kernel + out_pad;
}

void ModelGraph::validate() const {
  std::set<std::string> defined(input_names.begin(), input_names.end());
  if (defined.size() != input_names.size())
    throw ValueError("graph: duplicate input name");
  for (const auto &node : nodes) {
    for (const auto &in : node.inputs)
      if (!defined.count(in))
        throw ValueError("graph: layer '" + node.name + "' consumes '" + in +
                         "' which is not produced earlier (graph must be in topological order)");
    for (const auto &out : node.outputs) {
      if (defined.count(out))
        throw ValueError("graph: tensor '" + out + "' produced more than once");
      defined.insert(out);
    }
  }
  for (const auto &out : output_names)
    if (!defined.count(out)) throw ValueError("graph: unknown output '" + out + "'");
  if (!bottleneck_name.empty() && !defined.count(bottleneck_name))
    throw ValueError("graph: unknown bottleneck '" + bottleneck_name + "'");
}

int64_t ModelGraph::parameter_count() const {
  int64_t n = 0;
  for (const auto &node : nodes)
    if (node.layer.has_params()) n += node.layer.weight.numel() + node.layer.bias.numel();
  return n;
}

// ---------------------------------------------------------------------------
// im2col machinery
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void layer_shape_error(const GraphNode &node, const std::string &msg) {
  throw ShapeError("layer '" + node.name + "' (" + layer_kind_name(node.layer.kind) +
                   "): " + msg);
}

// cols is [(C*kh*kw) x (N*oh*ow)]; zero padding handled here.
void im2col(const double *x, int n_batch, int channels, int height, int width, int kh, int kw,
            int stride, int pad, int oh, int ow, double *cols) {
  const size_t n_cols = static_cast<size_t>(n_batch) * oh * ow;
  const int n_rows = channels * kh * kw;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n_rows; ++r) {
    const int c = r / (kh * kw);
    const int ki = (r / kw) % kh;
    const int kj = r % kw;
    double *row = cols + static_cast<size_t>(r) * n_cols;
    for (int n = 0; n < n_batch; ++n) {
      const double *xn =
          x + (static_cast<size_t>(n) * channels + c) * height * width;
      for (int i = 0; i < oh; ++i) {
        const int ih = i * stride - pad + ki;
        double *dst = row + (static_cast<size_t>(n) * oh + i) * ow;
        if (ih < 0 || ih >= height) {
          std::fill(dst, dst + ow, 0.0);
          continue;
        }
        const double *xrow = xn + static_cast<size_t>(ih) * width;
        for (int j = 0; j < ow; ++j) {
          const int iw = j * stride - pad + kj;
          dst[j] = (iw >= 0 && iw < width) ? xrow[iw] : 0.0;
        }
      }
    }
  }
}

// Scatter-add of cols [(C*kh*kw) x (N*src_h*src_w)] into x [N, C, H, W].
// The caller zero-fills x. Each (n, c) slice is owned by one iteration, so
// the parallel loop is race-free and the accumulation order is fixed.
void col2im(const double *cols, int n_batch, int channels, int height, int width, int kh,
            int kw, int stride, int pad, int src_h, int src_w, double *x) {
  const size_t n_cols = static_cast<size_t>(n_batch) * src_h * src_w;
#pragma omp parallel for schedule(static)
  for (int nc = 0; nc < n_batch * channels; ++nc) {
    const int n = nc / channels;
    const int c = nc % channels;
    double *xn = x + static_cast<size_t>(nc) * height * width;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const int r = (c * kh + ki) * kw + kj;
        const double *row = cols + static_cast<size_t>(r) * n_cols +
                            static_cast<size_t>(n) * src_h * src_w;
        for (int i = 0; i < src_h; ++i) {
          const int ih = i * stride - pad + ki;
          if (ih < 0 || ih >= height) continue;
          double *xrow = xn + static_cast<size_t>(ih) * width;
          const double *srow = row + static_cast<size_t>(i) * src_w;
          for (int j = 0; j < src_w; ++j) {
            const int iw = j * stride - pad + kj;
            if (iw >= 0 && iw < width) xrow[iw] += srow[j];
          }
        }
      }
    }
  }
}

// [N, C, P] -> [C, N*P]
void nchw_to_cnp(const double *x, int n_batch, int channels, int64_t plane, double *out) {
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    double *dst = out + static_cast<size_t>(c) * n_batch * plane;
    for (int n = 0; n < n_batch; ++n) {
      const double *src = x + (static_cast<size_t>(n) * channels + c) * plane;
      std::copy(src, src + plane, dst + static_cast<size_t>(n) * plane);
    }
  }
}

// [C, N*P] -> [N, C, P]
void cnp_to_nchw(const double *x, int n_batch, int channels, int64_t plane, double *out) {
#pragma omp parallel for schedule(static)
  for (int c = 0; c < channels; ++c) {
    const double *src = x + static_cast<size_t>(c) * n_batch * plane;
    for (int n = 0; n < n_batch; ++n) {
      double *dst = out + (static_cast<size_t>(n) * channels + c) * plane;
      std::copy(src + static_cast<size_t>(n) * plane, src + static_cast<size_t>(n + 1) * plane,
                dst);
    }
  }
}

void check_image_input(const GraphNode &node, const Tensor &x) {
  if (x.rank() != 4) layer_shape_error(node, "expected a 4-D batch x C x H x W input");
  if (x.dim(1) != node.layer.in_channels)
    layer_shape_error(node, "expected " + std::to_string(node.layer.in_channels) +
                                " input channels, got " + std::to_string(x.dim(1)));
}

Tensor conv2d_forward(const GraphNode &node, const Tensor &x) {
  const LayerParams &l = node.layer;
  check_image_input(node, x);
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = conv_out_dim(h, l.kernel_h, l.stride, l.pad);
  const int ow = conv_out_dim(w, l.kernel_w, l.stride, l.pad);
  if (oh <= 0 || ow <= 0) layer_shape_error(node, "output would have zero spatial size");

  const int krows = l.in_channels * l.kernel_h * l.kernel_w;
  const size_t n_cols = static_cast<size_t>(n) * oh * ow;
  std::vector<double> cols(static_cast<size_t>(krows) * n_cols);
  im2col(x.data.data(), n, l.in_channels, h, w, l.kernel_h, l.kernel_w, l.stride, l.pad, oh,
         ow, cols.data());

  std::vector<double> y_mat(static_cast<size_t>(l.out_channels) * n_cols);
  linalg::matmul(l.weight.data.data(), cols.data(), y_mat.data(), l.out_channels, krows,
                 static_cast<int>(n_cols));

  Tensor y({n, l.out_channels, oh, ow});
  cnp_to_nchw(y_mat.data(), n, l.out_channels, static_cast<int64_t>(oh) * ow, y.data.data());
  const int64_t plane = static_cast<int64_t>(oh) * ow;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n * l.out_channels; ++b) {
    const double bv = l.bias.data[b % l.out_channels];
    double *dst = y.data.data() + static_cast<size_t>(b) * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] += bv;
  }
  return y;
}

void conv2d_backward(const GraphNode &node, const Tensor &x, const Tensor &dy, Tensor &dweight,
                     Tensor &dbias, Tensor &dx) {
  const LayerParams &l = node.layer;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = dy.dim(2), ow = dy.dim(3);
  const int krows = l.in_channels * l.kernel_h * l.kernel_w;
  const size_t n_cols = static_cast<size_t>(n) * oh * ow;

  std::vector<double> dy_mat(static_cast<size_t>(l.out_channels) * n_cols);
  nchw_to_cnp(dy.data.data(), n, l.out_channels, static_cast<int64_t>(oh) * ow, dy_mat.data());

  std::vector<double> cols(static_cast<size_t>(krows) * n_cols);
  im2col(x.data.data(), n, l.in_channels, h, w, l.kernel_h, l.kernel_w, l.stride, l.pad, oh,
         ow, cols.data());

  dweight = Tensor(l.weight.shape);
  linalg::matmul_abt(dy_mat.data(), cols.data(), dweight.data.data(), l.out_channels,
                     static_cast<int>(n_cols), krows);

  dbias = Tensor(l.bias.shape);
  for (int c = 0; c < l.out_channels; ++c) {
    const double *row = dy_mat.data() + static_cast<size_t>(c) * n_cols;
    double acc = 0.0;
    for (size_t i = 0; i < n_cols; ++i) acc += row[i];
    dbias.data[c] = acc;
  }

  std::vector<double> dcols(static_cast<size_t>(krows) * n_cols);
  linalg::matmul_atb(l.weight.data.data(), dy_mat.data(), dcols.data(), krows, l.out_channels,
                     static_cast<int>(n_cols));

  dx = Tensor(x.shape);
  col2im(dcols.data(), n, l.in_channels, h, w, l.kernel_h, l.kernel_w, l.stride, l.pad, oh, ow,
         dx.data.data());
}

Tensor conv_transpose2d_forward(const GraphNode &node, const Tensor &x) {
  const LayerParams &l = node.layer;
  check_image_input(node, x);
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = conv_transpose_out_dim(h, l.kernel_h, l.stride, l.pad, l.out_pad_h);
  const int ow = conv_transpose_out_dim(w, l.kernel_w, l.stride, l.pad, l.out_pad_w);
  if (oh <= 0 || ow <= 0) layer_shape_error(node, "output would have zero spatial size");

  const int64_t plane_in = static_cast<int64_t>(h) * w;
  const size_t n_in = static_cast<size_t>(n) * plane_in;
  std::vector<double> x_mat(static_cast<size_t>(l.in_channels) * n_in);
  nchw_to_cnp(x.data.data(), n, l.in_channels, plane_in, x_mat.data());

  const int krows = l.out_channels * l.kernel_h * l.kernel_w;
  std::vector<double> cols(static_cast<size_t>(krows) * n_in);
  linalg::matmul_atb(l.weight.data.data(), x_mat.data(), cols.data(), krows, l.in_channels,
                     static_cast<int>(n_in));

  Tensor y({n, l.out_channels, oh, ow});
  col2im(cols.data(), n, l.out_channels, oh, ow, l.kernel_h, l.kernel_w, l.stride, l.pad, h, w,
         y.data.data());

  const int64_t plane = static_cast<int64_t>(oh) * ow;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < n * l.out_channels; ++b) {
    const double bv = l.bias.data[b % l.out_channels];
    double *dst = y.data.data() + static_cast<size_t>(b) * plane;
    for (int64_t i = 0; i < plane; ++i) dst[i] += bv;
  }
  return y;
}

void conv_transpose2d_backward(const GraphNode &node, const Tensor &x, const Tensor &dy,
                               Tensor &dweight, Tensor &dbias, Tensor &dx) {
  const LayerParams &l = node.layer;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int oh = dy.dim(2), ow = dy.dim(3);
  const int krows = l.out_channels * l.kernel_h * l.kernel_w;
  const size_t n_in = static_cast<size_t>(n) * h * w;

  // gather pass: dcols[(co,ki,kj), (n,i,j)] = dy[n, co, i*s-p+ki, j*s-p+kj]
  std::vector<double> dcols(static_cast<size_t>(krows) * n_in);
  im2col(dy.data.data(), n, l.out_channels, oh, ow, l.kernel_h, l.kernel_w, l.stride, l.pad, h,
         w, dcols.data());

  std::vector<double> x_mat(static_cast<size_t>(l.in_channels) * n_in);
  nchw_to_cnp(x.data.data(), n, l.in_channels, static_cast<int64_t>(h) * w, x_mat.data());

  dweight = Tensor(l.weight.shape);
  linalg::matmul_abt(x_mat.data(), dcols.data(), dweight.data.data(), l.in_channels,
                     static_cast<int>(n_in), krows);

  dbias = Tensor(l.bias.shape);
  const int64_t plane = static_cast<int64_t>(oh) * ow;
  for (int c = 0; c < l.out_channels; ++c) {
    double acc = 0.0;
    for (int b = 0; b < n; ++b) {
      const double *src = dy.data.data() + (static_cast<size_t>(b) * l.out_channels + c) * plane;
      for (int64_t i = 0; i < plane; ++i) acc += src[i];
    }
    dbias.data[c] = acc;
  }

  std::vector<double> dx_mat(static_cast<size_t>(l.in_channels) * n_in);
  linalg::matmul(l.weight.data.data(), dcols.data(), dx_mat.data(), l.in_channels, krows,
                 static_cast<int>(n_in));
  dx = Tensor(x.shape);
  cnp_to_nchw(dx_mat.data(), n, l.in_channels, static_cast<int64_t>(h) * w, dx.data.data());
}

}  // namespace

Tensor dense_forward(const LayerParams &layer, const Tensor &x) {
  if (x.rank() != 2 || x.dim(1) != layer.in_dim)
    throw ShapeError("Dense: expected input [N x " + std::to_string(layer.in_dim) + "], got " +
                     Tensor::shape_str(x.shape));
  const int n = x.dim(0);
  Tensor y({n, layer.out_dim});
  linalg::matmul_abt(x.data.data(), layer.weight.data.data(), y.data.data(), n, layer.in_dim,
                     layer.out_dim);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double *row = y.data.data() + static_cast<size_t>(i) * layer.out_dim;
    for (int j = 0; j < layer.out_dim; ++j) row[j] += layer.bias.data[j];
  }
  return y;
}

void dense_backward(const LayerParams &layer, const Tensor &x, const Tensor &dy,
                    Tensor &dweight, Tensor &dbias, Tensor &dx) {
  const int n = x.dim(0);
  dweight = Tensor(layer.weight.shape);
  linalg::matmul_atb(dy.data.data(), x.data.data(), dweight.data.data(), layer.out_dim, n,
                     layer.in_dim);
  dbias = Tensor(layer.bias.shape);
  for (int i = 0; i < n; ++i) {
    const double *row = dy.data.data() + static_cast<size_t>(i) * layer.out_dim;
    for (int j = 0; j < layer.out_dim; ++j) dbias.data[j] += row[j];
  }
  dx = Tensor(x.shape);
  linalg::matmul(dy.data.data(), layer.weight.data.data(), dx.data.data(), n, layer.out_dim,
                 layer.in_dim);
}

namespace {

Tensor concat_forward(const GraphNode &node, const std::vector<const Tensor *> &xs) {
  if (xs.empty()) layer_shape_error(node, "needs at least one input");
  const Tensor &first = *xs[0];
  if (first.rank() < 2) layer_shape_error(node, "inputs must have a channel axis");
  int total_ch = 0;
  for (const Tensor *t : xs) {
    if (t->rank() != first.rank() || t->dim(0) != first.dim(0))
      layer_shape_error(node, "inputs disagree on batch size or rank");
    for (int d = 2; d < first.rank(); ++d)
      if (t->dim(d) != first.dim(d)) layer_shape_error(node, "inputs disagree on spatial dims");
    total_ch += t->dim(1);
  }
  std::vector<int> shape = first.shape;
  shape[1] = total_ch;
  Tensor y(shape);

  int64_t plane = 1;
  for (int d = 2; d < first.rank(); ++d) plane *= first.dim(d);
  const int n = first.dim(0);
  for (int b = 0; b < n; ++b) {
    double *dst = y.data.data() + static_cast<size_t>(b) * total_ch * plane;
    for (const Tensor *t : xs) {
      const int64_t block = static_cast<int64_t>(t->dim(1)) * plane;
      const double *src = t->data.data() + static_cast<size_t>(b) * block;
      std::copy(src, src + block, dst);
      dst += block;
    }
  }
  return y;
}

std::vector<Tensor> split_forward(const GraphNode &node, const Tensor &x) {
  const auto &sizes = node.layer.split_sizes;
  if (x.rank() < 2) layer_shape_error(node, "input must have a channel axis");
  int total = 0;
  for (const int s : sizes) total += s;
  if (total != x.dim(1))
    layer_shape_error(node, "split sizes sum to " + std::to_string(total) + " but input has " +
                                std::to_string(x.dim(1)) + " channels");
  int64_t plane = 1;
  for (int d = 2; d < x.rank(); ++d) plane *= x.dim(d);
  const int n = x.dim(0);

  std::vector<Tensor> outs;
  outs.reserve(sizes.size());
  int offset = 0;
  for (const int s : sizes) {
    std::vector<int> shape = x.shape;
    shape[1] = s;
    Tensor y(shape);
    for (int b = 0; b < n; ++b) {
      const double *src =
          x.data.data() + (static_cast<size_t>(b) * x.dim(1) + offset) * plane;
      double *dst = y.data.data() + static_cast<size_t>(b) * s * plane;
      std::copy(src, src + static_cast<int64_t>(s) * plane, dst);
    }
    outs.push_back(std::move(y));
    offset += s;
  }
  return outs;
}

}  // namespace

TensorMap forward(const ModelGraph &graph, const TensorMap &inputs) {
  graph.validate();
  TensorMap acts = inputs;
  for (const auto &name : graph.input_names)
    if (!acts.count(name)) throw ValueError("forward: missing graph input '" + name + "'");

  for (const auto &node : graph.nodes) {
    std::vector<const Tensor *> in_tensors;
    in_tensors.reserve(node.inputs.size());
    for (const auto &in : node.inputs) {
      auto it = acts.find(in);
      if (it == acts.end())
        throw ValueError("forward: layer '" + node.name + "' missing input '" + in + "'");
      in_tensors.push_back(&it->second);
    }

    switch (node.layer.kind) {
      case LayerKind::kConv2d:
        acts[node.outputs[0]] = conv2d_forward(node, *in_tensors[0]);
        break;
      case LayerKind::kConvTranspose2d:
        acts[node.outputs[0]] = conv_transpose2d_forward(node, *in_tensors[0]);
        break;
      case LayerKind::kDense: {
        const Tensor &x = *in_tensors[0];
        if (x.rank() != 2 || x.dim(1) != node.layer.in_dim)
          layer_shape_error(node, "expected [N x " + std::to_string(node.layer.in_dim) +
                                      "], got " + Tensor::shape_str(x.shape));
        acts[node.outputs[0]] = dense_forward(node.layer, x);
        break;
      }
      case LayerKind::kRelu: {
        Tensor y = *in_tensors[0];
        for (double &v : y.data) v = std::max(v, 0.0);
        acts[node.outputs[0]] = std::move(y);
        break;
      }
      case LayerKind::kSigmoid: {
        Tensor y = *in_tensors[0];
        for (double &v : y.data) v = 1.0 / (1.0 + std::exp(-v));
        acts[node.outputs[0]] = std::move(y);
        break;
      }
      case LayerKind::kFlatten: {
        const Tensor &x = *in_tensors[0];
        if (x.rank() < 2) layer_shape_error(node, "needs a batch dimension");
        Tensor y({x.dim(0), static_cast<int>(x.numel() / x.dim(0))});
        y.data = x.data;
        acts[node.outputs[0]] = std::move(y);
        break;
      }
      case LayerKind::kReshape: {
        const Tensor &x = *in_tensors[0];
        std::vector<int> shape{x.dim(0)};
        shape.insert(shape.end(), node.layer.target_shape.begin(),
                     node.layer.target_shape.end());
        if (Tensor::numel_of(shape) != x.numel())
          layer_shape_error(node, "cannot reshape " + Tensor::shape_str(x.shape) + " to " +
                                      Tensor::shape_str(shape));
        Tensor y(shape);
        y.data = x.data;
        acts[node.outputs[0]] = std::move(y);
        break;
      }
      case LayerKind::kConcat:
        acts[node.outputs[0]] = concat_forward(node, in_tensors);
        break;
      case LayerKind::kSplit: {
        std::vector<Tensor> outs = split_forward(node, *in_tensors[0]);
        if (outs.size() != node.outputs.size())
          layer_shape_error(node, "split size count does not match output count");
        for (size_t i = 0; i < outs.size(); ++i)
          acts[node.outputs[i]] = std::move(outs[i]);
        break;
      }
    }
  }
  return acts;
}

GraphGradients backward(const ModelGraph &graph, const TensorMap &activations,
                        const TensorMap &loss_grads) {
  GraphGradients grads;
  grads.weight_grads.resize(graph.nodes.size());
  grads.bias_grads.resize(graph.nodes.size());

  TensorMap grad_map;
  for (const auto &[name, g] : loss_grads) {
    auto it = activations.find(name);
    if (it == activations.end())
      throw ValueError("backward: loss gradient for unknown tensor '" + name + "'");
    if (!g.same_shape(it->second))
      throw ShapeError("backward: loss gradient shape mismatch for '" + name + "'");
    grad_map[name] = g;
  }

  auto fetch_act = [&](const GraphNode &node, const std::string &name) -> const Tensor & {
    auto it = activations.find(name);
    if (it == activations.end())
      throw ValueError("backward: missing retained activation '" + name + "' for layer '" +
                       node.name + "' (run forward first)");
    return it->second;
  };

  auto add_grad = [&grad_map](const std::string &name, Tensor g) {
    auto it = grad_map.find(name);
    if (it == grad_map.end()) {
      grad_map.emplace(name, std::move(g));
    } else {
      Tensor &acc = it->second;
      for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
    }
  };

  for (auto node_it = graph.nodes.rbegin(); node_it != graph.nodes.rend(); ++node_it) {
    const GraphNode &node = *node_it;
    const size_t node_idx = static_cast<size_t>(graph.nodes.rend() - node_it - 1);

    bool any_grad = false;
    for (const auto &out : node.outputs)
      if (grad_map.count(out)) any_grad = true;

    if (!any_grad) {
      // nothing flows back through this node; parameter gradients are zero
      if (node.layer.has_params()) {
        grads.weight_grads[node_idx] = Tensor(node.layer.weight.shape);
        grads.bias_grads[node_idx] = Tensor(node.layer.bias.shape);
      }
      continue;
    }

    auto out_grad = [&](size_t i) -> Tensor {
      const std::string &name = node.outputs[i];
      auto it = grad_map.find(name);
      if (it != grad_map.end()) return it->second;
      return Tensor(fetch_act(node, name).shape);
    };

    switch (node.layer.kind) {
      case LayerKind::kConv2d: {
        const Tensor &x = fetch_act(node, node.inputs[0]);
        Tensor dw, db, dx;
        conv2d_backward(node, x, out_grad(0), dw, db, dx);
        grads.weight_grads[node_idx] = std::move(dw);
        grads.bias_grads[node_idx] = std::move(db);
        add_grad(node.inputs[0], std::move(dx));
        break;
      }
      case LayerKind::kConvTranspose2d: {
        const Tensor &x = fetch_act(node, node.inputs[0]);
        Tensor dw, db, dx;
        conv_transpose2d_backward(node, x, out_grad(0), dw, db, dx);
        grads.weight_grads[node_idx] = std::move(dw);
        grads.bias_grads[node_idx] = std::move(db);
        add_grad(node.inputs[0], std::move(dx));
        break;
      }
      case LayerKind::kDense: {
        const Tensor &x = fetch_act(node, node.inputs[0]);
        Tensor dw, db, dx;
        dense_backward(node.layer, x, out_grad(0), dw, db, dx);
        grads.weight_grads[node_idx] = std::move(dw);
        grads.bias_grads[node_idx] = std::move(db);
        add_grad(node.inputs[0], std::move(dx));
        break;
      }
      case LayerKind::kRelu: {
        const Tensor &x = fetch_act(node, node.inputs[0]);
        Tensor dy = out_grad(0);
        for (size_t i = 0; i < dy.data.size(); ++i)
          if (x.data[i] <= 0.0) dy.data[i] = 0.0;
        add_grad(node.inputs[0], std::move(dy));
        break;
      }
      case LayerKind::kSigmoid: {
        const Tensor &y = fetch_act(node, node.outputs[0]);
        Tensor dy = out_grad(0);
        for (size_t i = 0; i < dy.data.size(); ++i)
          dy.data[i] *= y.data[i] * (1.0 - y.data[i]);
        add_grad(node.inputs[0], std::move(dy));
        break;
      }
      case LayerKind::kFlatten:
      case LayerKind::kReshape: {
        const Tensor &x = fetch_act(node, node.inputs[0]);
        Tensor dy = out_grad(0);
        Tensor dx(x.shape);
        dx.data = std::move(dy.data);
        add_grad(node.inputs[0], std::move(dx));
        break;
      }
      case LayerKind::kConcat: {
        Tensor dy = out_grad(0);
        int64_t plane = 1;
        for (int d = 2; d < dy.rank(); ++d) plane *= dy.dim(d);
        const int n = dy.dim(0);
        int offset = 0;
        for (const auto &in_name : node.inputs) {
          const Tensor &x = fetch_act(node, in_name);
          const int ch = x.dim(1);
          Tensor dx(x.shape);
          for (int b = 0; b < n; ++b) {
            const double *src =
                dy.data.data() + (static_cast<size_t>(b) * dy.dim(1) + offset) * plane;
            double *dst = dx.data.data() + static_cast<size_t>(b) * ch * plane;
            std::copy(src, src + static_cast<int64_t>(ch) * plane, dst);
          }
          add_grad(in_name, std::move(dx));
          offset += ch;
        }
        break;
      }
      case LayerKind::kSplit: {
        const Tensor &x = fetch_act(node, node.inputs[0]);
        Tensor dx(x.shape);
        int64_t plane = 1;
        for (int d = 2; d < x.rank(); ++d) plane *= x.dim(d);
        const int n = x.dim(0);
        int offset = 0;
        for (size_t i = 0; i < node.outputs.size(); ++i) {
          const Tensor dyi = out_grad(i);
          const int ch = node.layer.split_sizes[i];
          for (int b = 0; b < n; ++b) {
            const double *src = dyi.data.data() + static_cast<size_t>(b) * ch * plane;
            double *dst =
                dx.data.data() + (static_cast<size_t>(b) * x.dim(1) + offset) * plane;
            std::copy(src, src + static_cast<int64_t>(ch) * plane, dst);
          }
          offset += ch;
        }
        add_grad(node.inputs[0], std::move(dx));
        break;
      }
    }
  }

  for (const auto &name : graph.input_names) {
    auto it = grad_map.find(name);
    if (it != grad_map.end()) grads.input_grads[name] = it->second;
  }
  return grads;
}

std::pair<double, Tensor> mse_loss(const Tensor &prediction, const Tensor &target) {
  if (!prediction.same_shape(target))
    throw ShapeError("mse_loss: shapes differ, " + Tensor::shape_str(prediction.shape) +
                     " vs " + Tensor::shape_str(target.shape));
  const double n = static_cast<double>(prediction.numel());
  Tensor grad(prediction.shape);
  double loss = 0.0;
  for (size_t i = 0; i < prediction.data.size(); ++i) {
    const double d = prediction.data[i] - target.data[i];
    loss += d * d;
    grad.data[i] = 2.0 * d / n;
  }
  return {loss / n, std::move(grad)};
}

AdamState AdamState::init(const std::vector<const Tensor *> &params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor *p : params) {
    s.m.emplace_back(Tensor(p->shape));
    s.v.emplace_back(Tensor(p->shape));
  }
  return s;
}

AdamState AdamState::init(const ModelGraph &graph, double learning_rate) {
  return init(graph_parameters(graph), learning_rate);
}

void adam_step(AdamState &state, const std::vector<Tensor *> &params,
               const std::vector<const Tensor *> &grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ValueError("adam_step: parameter/gradient/state count mismatch");
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i]->same_shape(*params[i]))
      throw ShapeError("adam_step: gradient shape mismatch at slot " + std::to_string(i));
    for (const double g : grads[i]->data)
      if (!std::isfinite(g)) throw ValueError("adam_step: non-finite gradient");
  }

  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    double *p = params[i]->data.data();
    const double *g = grads[i]->data.data();
    double *m = state.m[i].data.data();
    double *v = state.v[i].data.data();
    const size_t n = params[i]->data.size();
    for (size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

void adam_step(AdamState &state, ModelGraph &graph, const GraphGradients &grads) {
  std::vector<Tensor *> params = graph_parameters(graph);
  std::vector<const Tensor *> grad_ptrs;
  grad_ptrs.reserve(params.size());
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!graph.nodes[i].layer.has_params()) continue;
    if (grads.weight_grads[i].data.empty() || grads.bias_grads[i].data.empty())
      throw ValueError("adam_step: missing gradient for layer '" + graph.nodes[i].name + "'");
    grad_ptrs.push_back(&grads.weight_grads[i]);
    grad_ptrs.push_back(&grads.bias_grads[i]);
  }
  adam_step(state, params, grad_ptrs);
}

std::vector<Tensor *> graph_parameters(ModelGraph &graph) {
  std::vector<Tensor *> out;
  for (auto &node : graph.nodes) {
    if (!node.layer.has_params()) continue;
    out.push_back(&node.layer.weight);
    out.push_back(&node.layer.bias);
  }
  return out;
}

std::vector<const Tensor *> graph_parameters(const ModelGraph &graph) {
  std::vector<const Tensor *> out;
  for (const auto &node : graph.nodes) {
    if (!node.layer.has_params()) continue;
    out.push_back(&node.layer.weight);
    out.push_back(&node.layer.bias);
  }
  return out;
}

void init_parameters(ModelGraph &graph, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto &node : graph.nodes) {
    LayerParams &l = node.layer;
    if (!l.has_params()) continue;
    int fan_in = 0;
    switch (l.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kConvTranspose2d:
        fan_in = l.in_channels * l.kernel_h * l.kernel_w;
        break;
      case LayerKind::kDense:
        fan_in = l.in_dim;
        break;
      default:
        break;
    }
    const double bound = std::sqrt(6.0 / std::max(fan_in, 1));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double &w : l.weight.data) w = dist(rng);
    std::fill(l.bias.data.begin(), l.bias.data.end(), 0.0);
  }
}

}  // namespace mspec::nn

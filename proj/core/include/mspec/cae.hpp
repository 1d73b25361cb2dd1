// core/include/mspec/cae.hpp

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

#ifndef MSPEC_CAE_HPP_
#define MSPEC_CAE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mspec/nn.hpp"
#include "mspec/representations.hpp"

namespace mspec::cae {

// Convolutional autoencoder configuration. One branch per representation;
// two or three branches form the multi-spectral variant whose encoders are
// concatenated before a shared trunk and bottleneck.
struct CAEConfig {
  std::vector<repr::RepresentationSpec> branch_specs;  // 1, 2 or 3 entries

  std::vector<int> channels_per_stage{16, 32, 64};
  int post_concat_channels = 128;
  int bottleneck_dim = 256;
  int kernel = 3;
  int stride = 2;
  int padding = 1;

  int epochs = 100;
  int batch_size = 32;
  int patience = 10;
  double learning_rate = 1e-3;

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;  // one entry per completed epoch
  std::vector<double> valid_loss;
  int best_epoch = 0;  // index into the curves
  double best_valid_loss = 0.0;
};

// Per-segment features: the bottleneck activation plus one reconstruction
// error vector per branch (row groups of the 128-row image mapped back onto
// that branch's n_bands bands, mean squared error over time).
struct FeatureVector {
  std::vector<double> bottleneck;
  std::vector<std::vector<double>> recon_errors;  // [branch][band]
  std::string speaker_id;
  std::string utterance_id;
  int segment_index = 0;
};

enum class FeatureSet { kBottleneck, kReconErrors, kBoth };

FeatureSet feature_set_from_name(const std::string &name);
std::string feature_set_name(FeatureSet set);

// Concatenates the selected feature blocks into one plain vector
// (bottleneck first, then per-branch reconstruction errors in branch order).
std::vector<double> flatten_features(const FeatureVector &features, FeatureSet set);

// One training/extraction sample: one image per branch, in branch order.
struct ImageSample {
  std::vector<const repr::TimeFreqImage *> branch_images;
  std::string speaker_id;
  std::string utterance_id;
  int segment_index = 0;
};

// Graph tensor naming used by the builder.
std::string branch_input_name(const repr::RepresentationSpec &spec);
std::string branch_recon_name(const repr::RepresentationSpec &spec);
constexpr const char *kBottleneckTensor = "bottleneck";

// Builds the (multi-branch) autoencoder graph. Per branch: three stride-2
// conv+ReLU stages; a channel Concat joins the branches; one further stride-2
// conv+ReLU trunk stage; Flatten and Dense produce the bottleneck. The
// decoder mirrors the encoder (Dense, Reshape, transposed-conv trunk, Split,
// three transposed-conv stages per branch with a Sigmoid at the end).
// Parameters are left zero; call nn::init_parameters.
nn::ModelGraph build_cae(const CAEConfig &config);

// Adam training on summed per-branch reconstruction MSE with early stopping
// on the validation loss; the best-epoch parameters are restored into graph.
// Train and validation speaker sets must be disjoint.
TrainReport train_autoencoder(nn::ModelGraph &graph, const std::vector<ImageSample> &train,
                              const std::vector<ImageSample> &valid, const CAEConfig &config,
                              uint64_t seed);

FeatureVector extract_features(const nn::ModelGraph &graph, const ImageSample &sample,
                               const CAEConfig &config);

// Batched variant (identical outputs, fewer forward passes).
std::vector<FeatureVector> extract_features_batch(const nn::ModelGraph &graph,
                                                  const std::vector<ImageSample> &samples,
                                                  const CAEConfig &config, int batch_size = 32);

}  // namespace mspec::cae

#endif  // MSPEC_CAE_HPP_

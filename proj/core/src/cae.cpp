// core/src/cae.cpp

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

#include "mspec/cae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mspec/rng.hpp"

namespace mspec::cae {

using nn::LayerParams;
using nn::ModelGraph;
using nn::Tensor;
using repr::kImageCols;
using repr::kImageRows;

void CAEConfig::validate() const {
  if (branch_specs.empty() || branch_specs.size() > 3)
    throw ValueError("CAEConfig: branch count must be 1, 2 or 3");
  if (channels_per_stage.size() != 3)
    throw ValueError("CAEConfig: channels_per_stage must have 3 entries");
  for (const int c : channels_per_stage)
    if (c <= 0) throw ValueError("CAEConfig: channel counts must be positive");
  if (post_concat_channels <= 0 || bottleneck_dim <= 0)
    throw ValueError("CAEConfig: trunk channels and bottleneck_dim must be positive");
  if (kernel <= 0 || stride <= 0 || padding < 0)
    throw ValueError("CAEConfig: bad kernel/stride/padding");
  if (epochs <= 0 || batch_size <= 0 || patience < 0 || learning_rate <= 0.0)
    throw ValueError("CAEConfig: bad training hyperparameters");
  std::set<repr::Kind> kinds;
  for (const auto &spec : branch_specs)
    if (!kinds.insert(spec.kind).second)
      throw ValueError("CAEConfig: duplicate representation kind across branches");
}

std::string branch_input_name(const repr::RepresentationSpec &spec) {
  return "in_" + repr::kind_name(spec.kind);
}

std::string branch_recon_name(const repr::RepresentationSpec &spec) {
  return "recon_" + repr::kind_name(spec.kind);
}

FeatureSet feature_set_from_name(const std::string &name) {
  if (name == "bottleneck") return FeatureSet::kBottleneck;
  if (name == "recon") return FeatureSet::kReconErrors;
  if (name == "both") return FeatureSet::kBoth;
  throw ValueError("unknown feature set '" + name + "' (expected bottleneck, recon or both)");
}

std::string feature_set_name(FeatureSet set) {
  switch (set) {
    case FeatureSet::kBottleneck: return "bottleneck";
    case FeatureSet::kReconErrors: return "recon";
    case FeatureSet::kBoth: return "both";
  }
  return "?";
}

std::vector<double> flatten_features(const FeatureVector &features, FeatureSet set) {
  std::vector<double> out;
  if (set != FeatureSet::kReconErrors)
    out.insert(out.end(), features.bottleneck.begin(), features.bottleneck.end());
  if (set != FeatureSet::kBottleneck)
    for (const auto &branch : features.recon_errors)
      out.insert(out.end(), branch.begin(), branch.end());
  return out;
}

namespace {

struct Dims {
  int h, w;
};

int conv_down(int in, int kernel, int stride, int pad) {
  return nn::conv_out_dim(in, kernel, stride, pad);
}

// output_padding needed for a stride-s transposed conv to land exactly on
// `target` from `in`
int out_pad_for(int in, int target, int kernel, int stride, int pad) {
  const int base = nn::conv_transpose_out_dim(in, kernel, stride, pad, 0);
  const int op = target - base;
  if (op < 0 || op >= stride)
    throw ValueError("build_cae: cannot mirror dimension " + std::to_string(target) +
                     " from " + std::to_string(in));
  return op;
}

}  // namespace

ModelGraph build_cae(const CAEConfig &config) {
  config.validate();
  const int k = config.kernel, s = config.stride, p = config.padding;
  const auto &ch = config.channels_per_stage;
  const int n_branches = static_cast<int>(config.branch_specs.size());

  // encoder spatial chain, identical for every branch
  std::vector<Dims> dims;  // dims[0] = input, dims[4] = trunk output
  dims.push_back({kImageRows, kImageCols});
  for (int stage = 0; stage < 4; ++stage) {
    const Dims d = dims.back();
    const Dims next{conv_down(d.h, k, s, p), conv_down(d.w, k, s, p)};
    if (next.h < 1 || next.w < 1)
      throw ValueError("build_cae: downsampling reaches zero spatial size at stage " +
                       std::to_string(stage + 1));
    dims.push_back(next);
  }

  ModelGraph g;
  auto add = [&g](const std::string &name, LayerParams layer, std::vector<std::string> inputs,
                  std::vector<std::string> outputs) {
    g.nodes.push_back({name, std::move(layer), std::move(inputs), std::move(outputs)});
  };

  // ---- encoders ----
  std::vector<std::string> branch_codes;
  for (const auto &spec : config.branch_specs) {
    const std::string b = repr::kind_name(spec.kind);
    g.input_names.push_back(branch_input_name(spec));
    std::string cur = branch_input_name(spec);
    const int in_ch[3] = {1, ch[0], ch[1]};
    for (int stage = 0; stage < 3; ++stage) {
      const std::string conv_out = b + "_e" + std::to_string(stage + 1);
      add(b + "_enc" + std::to_string(stage + 1),
          LayerParams::conv2d(in_ch[stage], ch[stage], k, s, p), {cur}, {conv_out});
      add(b + "_enc" + std::to_string(stage + 1) + "_relu", LayerParams::relu(), {conv_out},
          {conv_out + "r"});
      cur = conv_out + "r";
    }
    branch_codes.push_back(cur);
  }

  add("concat", LayerParams::concat(), branch_codes, {"trunk_in"});
  const int concat_ch = ch[2] * n_branches;

  add("trunk_enc", LayerParams::conv2d(concat_ch, config.post_concat_channels, k, s, p),
      {"trunk_in"}, {"trunk_code"});
  add("trunk_enc_relu", LayerParams::relu(), {"trunk_code"}, {"trunk_coder"});

  const int flat_dim = config.post_concat_channels * dims[4].h * dims[4].w;
  add("flatten", LayerParams::flatten(), {"trunk_coder"}, {"code_flat"});
  add("bottleneck_fc", LayerParams::dense(flat_dim, config.bottleneck_dim), {"code_flat"},
      {kBottleneckTensor});

  // ---- decoder ----
  add("expand_fc", LayerParams::dense(config.bottleneck_dim, flat_dim), {kBottleneckTensor},
      {"dec_flat"});
  add("unflatten",
      LayerParams::reshape({config.post_concat_channels, dims[4].h, dims[4].w}), {"dec_flat"},
      {"dec_trunk_in"});

  add("trunk_dec",
      LayerParams::conv_transpose2d(config.post_concat_channels, concat_ch, k, s, p,
                                    out_pad_for(dims[4].h, dims[3].h, k, s, p),
                                    out_pad_for(dims[4].w, dims[3].w, k, s, p)),
      {"dec_trunk_in"}, {"dec_trunk"});
  add("trunk_dec_relu", LayerParams::relu(), {"dec_trunk"}, {"dec_trunkr"});

  std::vector<std::string> split_outs;
  for (const auto &spec : config.branch_specs)
    split_outs.push_back("dec_" + repr::kind_name(spec.kind));
  add("split", LayerParams::split(std::vector<int>(n_branches, ch[2])), {"dec_trunkr"},
      split_outs);

  for (size_t bi = 0; bi < config.branch_specs.size(); ++bi) {
    const auto &spec = config.branch_specs[bi];
    const std::string b = repr::kind_name(spec.kind);
    std::string cur = split_outs[bi];
    const int stage_in[3] = {ch[2], ch[1], ch[0]};
    const int stage_out[3] = {ch[1], ch[0], 1};
    // dims indices: 3 -> 2 -> 1 -> 0
    for (int stage = 0; stage < 3; ++stage) {
      const Dims from = dims[3 - stage], to = dims[2 - stage];
      const std::string out =
          (stage == 2) ? branch_recon_name(spec) : b + "_d" + std::to_string(stage + 1);
      add(b + "_dec" + std::to_string(stage + 1),
          LayerParams::conv_transpose2d(stage_in[stage], stage_out[stage], k, s, p,
                                        out_pad_for(from.h, to.h, k, s, p),
                                        out_pad_for(from.w, to.w, k, s, p)),
          {cur}, {stage == 2 ? out + "_pre" : out});
      if (stage == 2) {
        add(b + "_out_sigmoid", LayerParams::sigmoid(), {out + "_pre"}, {out});
      } else {
        add(b + "_dec" + std::to_string(stage + 1) + "_relu", LayerParams::relu(), {out},
            {out + "r"});
        cur = out + "r";
      }
    }
    g.output_names.push_back(branch_recon_name(spec));
  }

  g.bottleneck_name = kBottleneckTensor;
  g.validate();
  return g;
}

namespace {

void check_sample(const ImageSample &sample, const CAEConfig &config, const char *who) {
  if (sample.branch_images.size() != config.branch_specs.size())
    throw ValueError(std::string(who) + ": sample has " +
                     std::to_string(sample.branch_images.size()) + " images but config has " +
                     std::to_string(config.branch_specs.size()) + " branches");
  for (size_t b = 0; b < config.branch_specs.size(); ++b) {
    const repr::TimeFreqImage *img = sample.branch_images[b];
    if (img == nullptr) throw ValueError(std::string(who) + ": null image");
    if (img->spec.kind != config.branch_specs[b].kind)
      throw ValueError(std::string(who) + ": branch " + std::to_string(b) + " expects " +
                       repr::kind_name(config.branch_specs[b].kind) + " but got " +
                       repr::kind_name(img->spec.kind));
    if (img->values.rows() != kImageRows || img->values.cols() != kImageCols)
      throw ShapeError(std::string(who) + ": image is not 128x126");
  }
}

// Stacks samples [first, last) into one batch tensor per branch.
nn::TensorMap make_batch(const std::vector<ImageSample> &samples, const std::vector<int> &order,
                         size_t first, size_t last, const CAEConfig &config) {
  const int n = static_cast<int>(last - first);
  nn::TensorMap inputs;
  for (size_t b = 0; b < config.branch_specs.size(); ++b) {
    Tensor t({n, 1, kImageRows, kImageCols});
    for (int i = 0; i < n; ++i) {
      const ImageSample &s = samples[static_cast<size_t>(order[first + i])];
      const Matrix &m = s.branch_images[b]->values;
      std::copy(m.data(), m.data() + m.size(),
                t.data.begin() + static_cast<int64_t>(i) * kImageRows * kImageCols);
    }
    inputs[branch_input_name(config.branch_specs[b])] = std::move(t);
  }
  return inputs;
}

// Mean summed-branch reconstruction MSE over a sample set (no training).
double evaluate_loss(const nn::ModelGraph &graph, const std::vector<ImageSample> &samples,
                     const CAEConfig &config) {
  if (samples.empty()) return 0.0;
  std::vector<int> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  double total = 0.0;
  const size_t bs = static_cast<size_t>(config.batch_size);
  for (size_t first = 0; first < samples.size(); first += bs) {
    const size_t last = std::min(first + bs, samples.size());
    nn::TensorMap inputs = make_batch(samples, order, first, last, config);
    nn::TensorMap acts = nn::forward(graph, inputs);
    for (const auto &spec : config.branch_specs) {
      const auto [loss, grad] =
          nn::mse_loss(acts.at(branch_recon_name(spec)), inputs.at(branch_input_name(spec)));
      (void)grad;
      total += loss * static_cast<double>(last - first);
    }
  }
  return total / static_cast<double>(samples.size());
}

std::vector<Tensor> snapshot_params(const nn::ModelGraph &graph) {
  std::vector<Tensor> out;
  for (const Tensor *p : nn::graph_parameters(graph)) out.push_back(*p);
  return out;
}

void restore_params(nn::ModelGraph &graph, const std::vector<Tensor> &snapshot) {
  std::vector<Tensor *> params = nn::graph_parameters(graph);
  for (size_t i = 0; i < params.size(); ++i) *params[i] = snapshot[i];
}

}  // namespace

TrainReport train_autoencoder(nn::ModelGraph &graph, const std::vector<ImageSample> &train,
                              const std::vector<ImageSample> &valid, const CAEConfig &config,
                              uint64_t seed) {
  config.validate();
  if (train.empty()) throw ValueError("train_autoencoder: empty training set");
  if (valid.empty()) throw ValueError("train_autoencoder: empty validation set");
  std::set<std::string> train_speakers, valid_speakers;
  for (const auto &s : train) {
    check_sample(s, config, "train_autoencoder");
    train_speakers.insert(s.speaker_id);
  }
  for (const auto &s : valid) {
    check_sample(s, config, "train_autoencoder");
    valid_speakers.insert(s.speaker_id);
  }
  for (const auto &sp : valid_speakers)
    if (train_speakers.count(sp))
      throw ValueError("train_autoencoder: speaker '" + sp +
                       "' appears in both train and validation sets");

  nn::AdamState adam = nn::AdamState::init(graph, config.learning_rate);
  Rng rng = make_rng(seed, "ae_shuffle");

  TrainReport report;
  std::vector<Tensor> best = snapshot_params(graph);
  double best_valid = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  std::vector<int> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  const size_t bs = static_cast<size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (size_t first = 0; first < train.size(); first += bs) {
      const size_t last = std::min(first + bs, train.size());
      nn::TensorMap inputs = make_batch(train, order, first, last, config);
      nn::TensorMap acts = nn::forward(graph, inputs);

      nn::TensorMap loss_grads;
      double batch_loss = 0.0;
      for (const auto &spec : config.branch_specs) {
        auto [loss, grad] =
            nn::mse_loss(acts.at(branch_recon_name(spec)), inputs.at(branch_input_name(spec)));
        batch_loss += loss;
        loss_grads[branch_recon_name(spec)] = std::move(grad);
      }
      epoch_loss += batch_loss * static_cast<double>(last - first);

      nn::GraphGradients grads = nn::backward(graph, acts, loss_grads);
      nn::adam_step(adam, graph, grads);
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));

    const double vloss = evaluate_loss(graph, valid, config);
    report.valid_loss.push_back(vloss);

    if (vloss < best_valid) {
      best_valid = vloss;
      best_epoch = epoch;
      best = snapshot_params(graph);
    } else if (epoch - best_epoch > config.patience) {
      break;
    }
  }

  restore_params(graph, best);
  report.best_epoch = best_epoch;
  report.best_valid_loss = best_valid;
  return report;
}

FeatureVector extract_features(const nn::ModelGraph &graph, const ImageSample &sample,
                               const CAEConfig &config) {
  std::vector<FeatureVector> out = extract_features_batch(graph, {sample}, config, 1);
  return std::move(out.front());
}

std::vector<FeatureVector> extract_features_batch(const nn::ModelGraph &graph,
                                                  const std::vector<ImageSample> &samples,
                                                  const CAEConfig &config, int batch_size) {
  config.validate();
  for (const auto &s : samples) check_sample(s, config, "extract_features");
  std::vector<FeatureVector> out(samples.size());

  std::vector<int> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  const size_t bs = static_cast<size_t>(std::max(batch_size, 1));
  for (size_t first = 0; first < samples.size(); first += bs) {
    const size_t last = std::min(first + bs, samples.size());
    const int n = static_cast<int>(last - first);
    nn::TensorMap inputs = make_batch(samples, order, first, last, config);
    nn::TensorMap acts = nn::forward(graph, inputs);

    const Tensor &code = acts.at(graph.bottleneck_name);
    for (int i = 0; i < n; ++i) {
      const ImageSample &s = samples[first + i];
      FeatureVector &fv = out[first + i];
      fv.speaker_id = s.speaker_id;
      fv.utterance_id = s.utterance_id;
      fv.segment_index = s.segment_index;
      fv.bottleneck.assign(
          code.data.begin() + static_cast<int64_t>(i) * code.dim(1),
          code.data.begin() + static_cast<int64_t>(i + 1) * code.dim(1));

      fv.recon_errors.resize(config.branch_specs.size());
      for (size_t b = 0; b < config.branch_specs.size(); ++b) {
        const auto &spec = config.branch_specs[b];
        const Tensor &recon = acts.at(branch_recon_name(spec));
        const Matrix &input = s.branch_images[b]->values;
        const int n_bands = spec.n_bands;
        const int rows_per_band = kImageRows / n_bands;
        std::vector<double> &errs = fv.recon_errors[b];
        errs.assign(static_cast<size_t>(n_bands), 0.0);
        const double *rec =
            recon.data.data() + static_cast<int64_t>(i) * kImageRows * kImageCols;
        for (int r = 0; r < kImageRows; ++r) {
          const int band = std::min(r / rows_per_band, n_bands - 1);
          double acc = 0.0;
          for (int c = 0; c < kImageCols; ++c) {
            const double d = rec[static_cast<size_t>(r) * kImageCols + c] - input(r, c);
            acc += d * d;
          }
          errs[static_cast<size_t>(band)] += acc;
        }
        const double denom = static_cast<double>(rows_per_band) * kImageCols;
        for (double &e : errs) e /= denom;
      }
    }
  }
  return out;
}

}  // namespace mspec::cae

// tests/unit/test_cae.cpp

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

#include "mspec/cae.hpp"
#include "mspec/rng.hpp"

using namespace mspec;
using cae::CAEConfig;
using cae::ImageSample;

namespace {

// small configuration so the unit tests stay fast
CAEConfig tiny_config(int branches) {
  CAEConfig config;
  config.branch_specs.clear();
  if (branches >= 1) config.branch_specs.push_back(repr::RepresentationSpec::wideband());
  if (branches >= 2) config.branch_specs.push_back(repr::RepresentationSpec::narrowband());
  if (branches >= 3) config.branch_specs.push_back(repr::RepresentationSpec::wavelet());
  config.channels_per_stage = {2, 3, 4};
  config.post_concat_channels = 5;
  config.bottleneck_dim = 7;
  config.epochs = 5;
  config.batch_size = 8;
  config.patience = 10;
  return config;
}

// smooth > 0: spectrogram-like images, two fixed "formant" bands with
// per-image amplitudes and temporal envelopes; smooth == 0: white noise
repr::TimeFreqImage make_image(const repr::RepresentationSpec &spec, uint64_t seed,
                               double smooth = 0.0) {
  repr::TimeFreqImage image;
  image.spec = spec;
  image.values = Matrix(repr::kImageRows, repr::kImageCols);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a1 = 0.3 + 0.7 * u(rng), a2 = 0.3 + 0.7 * u(rng);
  const double w1 = 0.05 + 0.1 * u(rng), w2 = 0.05 + 0.1 * u(rng);
  const double p1 = 6.28 * u(rng), p2 = 6.28 * u(rng);
  for (int r = 0; r < image.values.rows(); ++r) {
    const double g1 = std::exp(-std::pow((r - 40.0) / 12.0, 2.0));
    const double g2 = std::exp(-std::pow((r - 90.0) / 14.0, 2.0));
    for (int c = 0; c < image.values.cols(); ++c) {
      if (smooth > 0.0) {
        const double t1 = 0.5 + 0.5 * std::sin(w1 * c + p1);
        const double t2 = 0.5 + 0.5 * std::sin(w2 * c + p2);
        image.values(r, c) = std::min(1.0, 0.08 + a1 * g1 * t1 + a2 * g2 * t2);
      } else {
        image.values(r, c) = u(rng);
      }
    }
  }
  return image;
}

struct SampleStore {
  std::vector<std::vector<repr::TimeFreqImage>> images;  // [sample][branch]
  std::vector<ImageSample> samples;
};

SampleStore make_samples(const CAEConfig &config, int count, const std::string &speaker_prefix,
                         uint64_t seed, double smooth = 0.0) {
  SampleStore store;
  store.images.resize(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    for (size_t b = 0; b < config.branch_specs.size(); ++b)
      store.images[static_cast<size_t>(i)].push_back(
          make_image(config.branch_specs[b], seed + 31 * i + 7 * b, smooth));
  for (int i = 0; i < count; ++i) {
    ImageSample s;
    s.speaker_id = speaker_prefix + std::to_string(i % 5);
    s.utterance_id = "u0";
    s.segment_index = i;
    for (auto &img : store.images[static_cast<size_t>(i)]) s.branch_images.push_back(&img);
    store.samples.push_back(std::move(s));
  }
  return store;
}

}  // namespace

TEST_CASE("single-branch encoder halves 128x126 down to 8x8 and mirrors back") {
  CAEConfig config = tiny_config(1);
  nn::ModelGraph graph = cae::build_cae(config);
  nn::init_parameters(graph, 1);

  nn::TensorMap inputs;
  inputs[cae::branch_input_name(config.branch_specs[0])] =
      nn::Tensor({1, 1, repr::kImageRows, repr::kImageCols});
  const nn::TensorMap acts = nn::forward(graph, inputs);

  // spatial chain oracle: repeated floor((d + 2 - 3)/2) + 1
  CHECK(acts.at("wideband_e1").shape == std::vector<int>{1, 2, 64, 63});
  CHECK(acts.at("wideband_e2").shape == std::vector<int>{1, 3, 32, 32});
  CHECK(acts.at("wideband_e3").shape == std::vector<int>{1, 4, 16, 16});
  CHECK(acts.at("trunk_code").shape == std::vector<int>{1, 5, 8, 8});
  CHECK(acts.at(graph.bottleneck_name).shape == std::vector<int>{1, 7});
  CHECK(acts.at(cae::branch_recon_name(config.branch_specs[0])).shape ==
        std::vector<int>{1, 1, repr::kImageRows, repr::kImageCols});
}

TEST_CASE("default two-branch concat carries 64 + 64 = 128 channels") {
  CAEConfig config;  // defaults: channels [16, 32, 64], trunk 128
  config.branch_specs = {repr::RepresentationSpec::wideband(),
                         repr::RepresentationSpec::narrowband()};
  const nn::ModelGraph graph = cae::build_cae(config);
  for (const auto &node : graph.nodes) {
    if (node.name == "trunk_enc") {
      CHECK(node.layer.in_channels == 128);
      CHECK(node.layer.out_channels == 128);
    }
  }
}

TEST_CASE("reconstruction shapes equal input shapes for 1, 2 and 3 branches") {
  for (int branches : {1, 2, 3}) {
    CAEConfig config = tiny_config(branches);
    nn::ModelGraph graph = cae::build_cae(config);
    nn::init_parameters(graph, 7);

    nn::TensorMap inputs;
    for (const auto &spec : config.branch_specs)
      inputs[cae::branch_input_name(spec)] =
          nn::Tensor({2, 1, repr::kImageRows, repr::kImageCols});
    const nn::TensorMap acts = nn::forward(graph, inputs);

    int recon_count = 0;
    for (const auto &spec : config.branch_specs) {
      const nn::Tensor &recon = acts.at(cae::branch_recon_name(spec));
      CHECK(recon.shape == std::vector<int>{2, 1, repr::kImageRows, repr::kImageCols});
      ++recon_count;
    }
    CHECK(recon_count == branches);
    CHECK(static_cast<int>(graph.output_names.size()) == branches);
  }
}

TEST_CASE("decoder mirrors the encoder: stage counts and split sizes") {
  const CAEConfig config = tiny_config(3);
  const nn::ModelGraph graph = cae::build_cae(config);

  int enc_convs = 0, dec_convs = 0;
  std::vector<int> split_sizes, concat_inputs;
  for (const auto &node : graph.nodes) {
    if (node.layer.kind == nn::LayerKind::kConv2d) ++enc_convs;
    if (node.layer.kind == nn::LayerKind::kConvTranspose2d) ++dec_convs;
    if (node.layer.kind == nn::LayerKind::kSplit) split_sizes = node.layer.split_sizes;
    if (node.layer.kind == nn::LayerKind::kConcat)
      concat_inputs.assign(node.inputs.size(), config.channels_per_stage.back());
  }
  CHECK(enc_convs == dec_convs);
  CHECK(split_sizes == concat_inputs);
}

TEST_CASE("a config that collapses the spatial size is rejected") {
  CAEConfig config = tiny_config(1);
  config.kernel = 5;
  config.padding = 0;
  config.stride = 4;  // 128 -> 31 -> 7 -> 1 -> 0
  CHECK_THROWS_AS(cae::build_cae(config), ValueError);
}

TEST_CASE("training reduces the loss and the curves behave") {
  CAEConfig config = tiny_config(1);
  config.channels_per_stage = {8, 16, 32};
  config.post_concat_channels = 32;
  config.bottleneck_dim = 64;
  config.epochs = 20;
  config.learning_rate = 2e-3;
  SampleStore train = make_samples(config, 40, "trn", 100, 0.05);
  SampleStore valid = make_samples(config, 10, "val", 900, 0.05);

  nn::ModelGraph graph = cae::build_cae(config);
  nn::init_parameters(graph, 5);
  const cae::TrainReport report =
      cae::train_autoencoder(graph, train.samples, valid.samples, config, 42);

  REQUIRE(!report.train_loss.empty());
  REQUIRE(report.valid_loss.size() == report.train_loss.size());
  CHECK(report.train_loss.back() < 0.5 * report.train_loss.front());
  CHECK(report.best_epoch >= 0);
  CHECK(report.best_epoch < static_cast<int>(report.valid_loss.size()));
  CHECK(report.valid_loss[static_cast<size_t>(report.best_epoch)] <= report.valid_loss[0]);
  CHECK(report.best_valid_loss ==
        doctest::Approx(report.valid_loss[static_cast<size_t>(report.best_epoch)]));
}

TEST_CASE("patience zero stops at the first validation-loss increase") {
  CAEConfig config = tiny_config(1);
  config.epochs = 30;
  config.patience = 0;
  config.learning_rate = 0.2;  // deliberately unstable so the loss oscillates
  SampleStore train = make_samples(config, 12, "trn", 55, 0.08);
  SampleStore valid = make_samples(config, 6, "val", 66, 0.08);

  nn::ModelGraph graph = cae::build_cae(config);
  nn::init_parameters(graph, 3);
  const cae::TrainReport report =
      cae::train_autoencoder(graph, train.samples, valid.samples, config, 9);

  // every non-improving epoch must be the last one recorded
  double best = std::numeric_limits<double>::infinity();
  for (size_t e = 0; e < report.valid_loss.size(); ++e) {
    if (report.valid_loss[e] < best) {
      best = report.valid_loss[e];
    } else {
      CHECK(e + 1 == report.valid_loss.size());
    }
  }
}

TEST_CASE("identical seeds and data give identical training reports") {
  CAEConfig config = tiny_config(1);
  config.epochs = 4;
  SampleStore train = make_samples(config, 16, "trn", 7, 0.05);
  SampleStore valid = make_samples(config, 6, "val", 8, 0.05);

  nn::ModelGraph g1 = cae::build_cae(config);
  nn::ModelGraph g2 = cae::build_cae(config);
  nn::init_parameters(g1, 11);
  nn::init_parameters(g2, 11);
  const cae::TrainReport r1 = cae::train_autoencoder(g1, train.samples, valid.samples, config, 5);
  const cae::TrainReport r2 = cae::train_autoencoder(g2, train.samples, valid.samples, config, 5);
  CHECK(r1.train_loss == r2.train_loss);
  CHECK(r1.valid_loss == r2.valid_loss);
  CHECK(r1.best_epoch == r2.best_epoch);
}

TEST_CASE("speaker overlap between train and validation is rejected") {
  CAEConfig config = tiny_config(1);
  SampleStore train = make_samples(config, 6, "spk", 1);
  SampleStore valid = make_samples(config, 6, "spk", 2);  // same speaker ids
  nn::ModelGraph graph = cae::build_cae(config);
  CHECK_THROWS_AS(cae::train_autoencoder(graph, train.samples, valid.samples, config, 1),
                  ValueError);
  CHECK_THROWS_AS(cae::train_autoencoder(graph, {}, valid.samples, config, 1), ValueError);
}

TEST_CASE("bottleneck length equals the configured dimension for all branch counts") {
  for (int branches : {1, 2, 3}) {
    CAEConfig config = tiny_config(branches);
    nn::ModelGraph graph = cae::build_cae(config);
    nn::init_parameters(graph, 2);
    SampleStore store = make_samples(config, 1, "s", 3);
    const cae::FeatureVector fv = cae::extract_features(graph, store.samples[0], config);
    CHECK(static_cast<int>(fv.bottleneck.size()) == config.bottleneck_dim);
    REQUIRE(fv.recon_errors.size() == static_cast<size_t>(branches));
    for (int b = 0; b < branches; ++b) {
      CHECK(static_cast<int>(fv.recon_errors[static_cast<size_t>(b)].size()) ==
            config.branch_specs[static_cast<size_t>(b)].n_bands);
      for (const double e : fv.recon_errors[static_cast<size_t>(b)]) CHECK(e >= 0.0);
    }
  }
}

TEST_CASE("an overfit single-image autoencoder reconstructs it almost exactly") {
  CAEConfig config = tiny_config(1);
  config.channels_per_stage = {4, 6, 8};
  config.post_concat_channels = 8;
  config.bottleneck_dim = 16;
  config.epochs = 600;
  config.patience = 600;
  config.learning_rate = 1e-2;
  config.batch_size = 1;

  // one gentle ramp image, duplicated under two speakers so the validation
  // split sees the same content
  auto gentle = [&](const std::string &speaker) {
    SampleStore store = make_samples(config, 1, speaker, 1);
    for (int r = 0; r < repr::kImageRows; ++r)
      for (int c = 0; c < repr::kImageCols; ++c)
        store.images[0][0].values(r, c) = 0.2 + 0.15 * r / repr::kImageRows;
    return store;
  };
  SampleStore train = gentle("a");
  SampleStore valid = gentle("b");

  nn::ModelGraph graph = cae::build_cae(config);
  nn::init_parameters(graph, 21);
  const cae::TrainReport report =
      cae::train_autoencoder(graph, train.samples, valid.samples, config, 13);
  REQUIRE(report.best_valid_loss < 1e-4);

  const cae::FeatureVector fv = cae::extract_features(graph, train.samples[0], config);
  for (const double e : fv.recon_errors[0]) CHECK(e < 1e-3);
}

TEST_CASE("perturbing one Mel band raises exactly that band's error, frozen model") {
  CAEConfig config = tiny_config(1);
  nn::ModelGraph graph = cae::build_cae(config);
  nn::init_parameters(graph, 31);

  SampleStore store = make_samples(config, 1, "s", 77, 0.05);
  const cae::FeatureVector base = cae::extract_features(graph, store.samples[0], config);

  const int band = 20;
  const int rows_per_band = repr::kImageRows / config.branch_specs[0].n_bands;
  auto perturbed_images = store.images;
  for (int r = band * rows_per_band; r < (band + 1) * rows_per_band; ++r)
    for (int c = 0; c < repr::kImageCols; ++c) perturbed_images[0][0].values(r, c) += 0.5;

  ImageSample sample = store.samples[0];
  sample.branch_images = {&perturbed_images[0][0]};
  const cae::FeatureVector bumped = cae::extract_features(graph, sample, config);
  CHECK(bumped.recon_errors[0][band] > base.recon_errors[0][band]);
}

TEST_CASE("feature extraction is a pure function of graph and images") {
  CAEConfig config = tiny_config(2);
  nn::ModelGraph graph = cae::build_cae(config);
  nn::init_parameters(graph, 8);
  SampleStore store = make_samples(config, 3, "s", 5);
  const auto a = cae::extract_features_batch(graph, store.samples, config, 2);
  const auto b = cae::extract_features_batch(graph, store.samples, config, 3);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bottleneck == b[i].bottleneck);
    CHECK(a[i].recon_errors == b[i].recon_errors);
  }
}

TEST_CASE("flatten_features composes the configured blocks in order") {
  cae::FeatureVector fv;
  fv.bottleneck = {1.0, 2.0};
  fv.recon_errors = {{3.0}, {4.0, 5.0}};
  CHECK(cae::flatten_features(fv, cae::FeatureSet::kBoth) ==
        std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(cae::flatten_features(fv, cae::FeatureSet::kBottleneck) ==
        std::vector<double>{1.0, 2.0});
  CHECK(cae::flatten_features(fv, cae::FeatureSet::kReconErrors) ==
        std::vector<double>{3.0, 4.0, 5.0});
}

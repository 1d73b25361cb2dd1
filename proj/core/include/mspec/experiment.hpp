// core/include/mspec/experiment.hpp

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

#ifndef MSPEC_EXPERIMENT_HPP_
#define MSPEC_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mspec/archive.hpp"
#include "mspec/cae.hpp"
#include "mspec/manifest.hpp"
#include "mspec/nested_cv.hpp"

namespace mspec::pipeline {

// Experiment settings, read from a `key = value` config file with CLI
// overrides on top. finalize() resolves the representation list from the
// fusion mode and branch multiplicity and validates the combination.
struct ExperimentConfig {
  std::vector<repr::RepresentationSpec> representations;  // fixed stream order
  int branches = 0;  // 0: derive from `representations`
  eval::FusionMode fusion = eval::FusionMode::kNone;
  eval::ClassifierKind classifier = eval::ClassifierKind::kSvm;
  cae::FeatureSet feature_set = cae::FeatureSet::kBoth;

  cae::CAEConfig cae;  // branch_specs filled per autoencoder unit at use
  double ae_valid_fraction = 0.2;

  std::vector<double> svm_c_grid{1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4};
  std::vector<double> svm_gamma_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  clf::MlpConfig mlp;

  int outer_folds = 10;
  int inner_folds = 9;
  bool aggregate_by_utterance_first = false;
  uint64_t seed = 0;

  static ExperimentConfig from_file(const std::string &path);
  void set(const std::string &key, const std::string &value);  // throws on unknown keys
  void finalize();

  // canonical text of every setting; its FNV-1a hex digest is the config
  // hash recorded in reports and archives
  std::string canonical_text() const;
  std::string hash() const;

  eval::CvOptions cv_options() const;
};

// Per-segment images for every selected representation, in manifest order.
struct ImageStore {
  std::vector<repr::RepresentationSpec> specs;             // stream order
  std::vector<eval::SampleMeta> samples;
  std::vector<std::vector<repr::TimeFreqImage>> images;    // [stream][sample]
  eval::Cohort cohort;
};

ImageStore compute_images(const Manifest &manifest,
                          const std::vector<repr::RepresentationSpec> &specs);

// Binary cache of an ImageStore (magic "MSPI", version, CRC-32 trailer).
void save_images(const ImageStore &store, const std::string &path);
ImageStore load_images(const std::string &path);

// One trained autoencoder unit: a single-representation AE, or the joint
// multi-branch AE in multispectral mode.
struct TrainedUnit {
  cae::CAEConfig config;
  nn::ModelGraph graph;
  cae::TrainReport report;
};

// Trains the experiment's AE unit(s) on the given speakers (with an internal
// speaker-grouped validation split).
std::vector<TrainedUnit> train_ae_units(const ImageStore &store,
                                        const ExperimentConfig &config,
                                        const std::vector<std::string> &train_speakers,
                                        uint64_t seed);

// Features of every sample in the store from one trained unit.
eval::FeatureMatrix unit_features(const TrainedUnit &unit, const ImageStore &store,
                                  cae::FeatureSet feature_set, int batch_size = 32);

// Nested-CV feature provider that retrains the AE unit(s) per outer fold on
// that fold's training speakers only.
class CaeFoldProvider : public eval::FoldFeatureProvider {
 public:
  CaeFoldProvider(const ImageStore &store, const ExperimentConfig &config);
  int stream_count() const override;
  std::vector<eval::FeatureMatrix> features_for_fold(
      const std::vector<std::string> &train_speakers, int fold_index,
      eval::LeakageRecord *record) override;

 private:
  const ImageStore &store_;
  const ExperimentConfig &config_;
};

// The `evaluate` pipeline: manifest -> images -> per-fold AEs -> nested CV.
eval::EvalReport run_experiment(const ImageStore &store, const ExperimentConfig &config);

// Feature CSV with block-tagged columns (s<k>:f<j>), one block per unit.
struct FeatureTable {
  std::vector<eval::SampleMeta> samples;
  std::vector<eval::FeatureMatrix> blocks;  // [unit][sample][dim]
};

void save_features(const FeatureTable &table, const std::string &path);
FeatureTable load_features(const std::string &path);

}  // namespace mspec::pipeline

#endif  // MSPEC_EXPERIMENT_HPP_

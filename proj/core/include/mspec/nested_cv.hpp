// core/include/mspec/nested_cv.hpp

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

#ifndef MSPEC_NESTED_CV_HPP_
#define MSPEC_NESTED_CV_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mspec/folds.hpp"
#include "mspec/metrics.hpp"
#include "mspec/mlp.hpp"

namespace mspec::eval {

struct SampleMeta {
  std::string speaker_id;
  std::string utterance_id;
  int segment_index = 0;
  int label = -1;  // +1 patient, -1 control
  std::optional<double> severity;
};

// Which speakers influenced each fitted component of one outer fold; the
// leakage guard asserts these never intersect the fold's test speakers.
struct LeakageRecord {
  std::vector<std::string> test_speakers;
  std::vector<std::string> ae_train_speakers;
  std::vector<std::string> scaler_fit_speakers;
  std::vector<std::string> grid_search_speakers;
};

using FeatureMatrix = std::vector<std::vector<double>>;  // [sample][dim]

// Supplies per-stream features for every sample, refitting any internal
// models (autoencoders) from the given training speakers only.
class FoldFeatureProvider {
 public:
  virtual ~FoldFeatureProvider() = default;
  virtual int stream_count() const = 0;
  virtual std::vector<FeatureMatrix> features_for_fold(
      const std::vector<std::string> &train_speakers, int fold_index,
      LeakageRecord *record) = 0;
};

// Fixed, precomputed features (no fold-local fitting). Used for tests and
// for classifier-only experiments.
class DirectFeatureProvider : public FoldFeatureProvider {
 public:
  explicit DirectFeatureProvider(std::vector<FeatureMatrix> streams)
      : streams_(std::move(streams)) {}
  int stream_count() const override { return static_cast<int>(streams_.size()); }
  std::vector<FeatureMatrix> features_for_fold(const std::vector<std::string> &, int,
                                               LeakageRecord *) override {
    return streams_;
  }

 private:
  std::vector<FeatureMatrix> streams_;
};

enum class FusionMode { kNone, kEarly, kLate, kMultispectral };
enum class ClassifierKind { kSvm, kMlp };

FusionMode fusion_from_name(const std::string &name);
std::string fusion_name(FusionMode mode);
ClassifierKind classifier_from_name(const std::string &name);
std::string classifier_name(ClassifierKind kind);

struct CvOptions {
  int outer_folds = 10;
  int inner_folds = 9;
  ClassifierKind classifier = ClassifierKind::kSvm;
  FusionMode fusion = FusionMode::kNone;
  std::vector<double> svm_c_grid{1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4};
  std::vector<double> svm_gamma_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  clf::MlpConfig mlp;
  bool aggregate_by_utterance_first = false;
  uint64_t seed = 0;
};

struct FoldResult {
  BinaryMetrics metrics;
  int n_test_speakers = 0;
  std::string hyperparams;
};

struct SpeakerScore {
  std::string speaker_id;
  int label = -1;
  int fold = 0;
  double decision = 0.0;    // aggregated raw decision value
  double calibrated = 0.0;  // Platt probability (SVM) / softmax probability (MLP)
  int prediction = -1;      // sign of decision; ties resolve to control
  std::optional<double> severity;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  BinaryMetrics mean_metrics;
  std::optional<double> spearman_rho;  // pooled calibrated scores vs severity
  int rho_speaker_count = 0;
  std::vector<SpeakerScore> speakers;  // one row per speaker, fold order
  std::vector<LeakageRecord> audit;
};

// Mean segment score per speaker; with by_utterance_first, segments are
// averaged within each utterance before speakers average their utterances.
std::map<std::string, double> aggregate_per_speaker(const std::vector<SampleMeta> &metas,
                                                    const std::vector<double> &segment_scores,
                                                    bool by_utterance_first = false);

EvalReport run_nested_cv(const Cohort &cohort, const std::vector<SampleMeta> &samples,
                         FoldFeatureProvider &provider, const CvOptions &options);

}  // namespace mspec::eval

#endif  // MSPEC_NESTED_CV_HPP_

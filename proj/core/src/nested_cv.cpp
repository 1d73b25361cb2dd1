// core/src/nested_cv.cpp

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

#include "mspec/nested_cv.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mspec/fusion.hpp"
#include "mspec/rng.hpp"
#include "mspec/scaler.hpp"
#include "mspec/svm.hpp"

namespace mspec::eval {

FusionMode fusion_from_name(const std::string &name) {
  if (name == "none") return FusionMode::kNone;
  if (name == "early") return FusionMode::kEarly;
  if (name == "late") return FusionMode::kLate;
  if (name == "multispectral") return FusionMode::kMultispectral;
  throw ValueError("unknown fusion mode '" + name +
                   "' (expected none, early, late or multispectral)");
}

std::string fusion_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kNone: return "none";
    case FusionMode::kEarly: return "early";
    case FusionMode::kLate: return "late";
    case FusionMode::kMultispectral: return "multispectral";
  }
  return "?";
}

ClassifierKind classifier_from_name(const std::string &name) {
  if (name == "svm") return ClassifierKind::kSvm;
  if (name == "mlp") return ClassifierKind::kMlp;
  throw ValueError("unknown classifier '" + name + "' (expected svm or mlp)");
}

std::string classifier_name(ClassifierKind kind) {
  return kind == ClassifierKind::kSvm ? "svm" : "mlp";
}

std::map<std::string, double> aggregate_per_speaker(const std::vector<SampleMeta> &metas,
                                                    const std::vector<double> &segment_scores,
                                                    bool by_utterance_first) {
  if (metas.size() != segment_scores.size())
    throw ValueError("aggregate_per_speaker: metas/scores length mismatch");

  std::map<std::string, double> out;
  if (!by_utterance_first) {
    std::map<std::string, std::pair<double, int>> acc;
    for (size_t i = 0; i < metas.size(); ++i) {
      auto &slot = acc[metas[i].speaker_id];
      slot.first += segment_scores[i];
      slot.second += 1;
    }
    for (const auto &[speaker, slot] : acc) out[speaker] = slot.first / slot.second;
    return out;
  }

  std::map<std::pair<std::string, std::string>, std::pair<double, int>> utt;
  for (size_t i = 0; i < metas.size(); ++i) {
    auto &slot = utt[{metas[i].speaker_id, metas[i].utterance_id}];
    slot.first += segment_scores[i];
    slot.second += 1;
  }
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto &[key, slot] : utt) {
    auto &sacc = acc[key.first];
    sacc.first += slot.first / slot.second;
    sacc.second += 1;
  }
  for (const auto &[speaker, slot] : acc) out[speaker] = slot.first / slot.second;
  return out;
}

namespace {

struct IndexSplit {
  std::vector<int> train;  // sample indices whose speaker is in the train set
  std::vector<int> test;
};

IndexSplit split_samples(const std::vector<SampleMeta> &samples,
                         const std::set<std::string> &test_speakers) {
  IndexSplit split;
  for (size_t i = 0; i < samples.size(); ++i)
    (test_speakers.count(samples[i].speaker_id) ? split.test : split.train)
        .push_back(static_cast<int>(i));
  return split;
}

std::vector<std::vector<double>> gather_rows(const FeatureMatrix &x,
                                             const std::vector<int> &idx) {
  std::vector<std::vector<double>> out;
  out.reserve(idx.size());
  for (const int i : idx) out.push_back(x[static_cast<size_t>(i)]);
  return out;
}

std::vector<int> gather_labels(const std::vector<SampleMeta> &samples,
                               const std::vector<int> &idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (const int i : idx) out.push_back(samples[static_cast<size_t>(i)].label);
  return out;
}

bool two_per_class(const std::vector<int> &labels) {
  int pos = 0, neg = 0;
  for (const int y : labels) (y == 1 ? pos : neg)++;
  return pos >= 2 && neg >= 2;
}

// Per-sample decision values over the whole sample set plus the calibration
// mapping fitted on the outer-train segments.
struct FittedPath {
  std::vector<double> decisions;  // one per sample
  double platt_a = -1.0;
  double platt_b = 0.0;
  std::string hyperparams;
};

FittedPath fit_svm_path(const FeatureMatrix &x, const std::vector<SampleMeta> &samples,
                        const IndexSplit &split,
                        const std::vector<std::vector<std::string>> &inner_plan,
                        const CvOptions &opt) {
  const std::vector<int> train_labels = gather_labels(samples, split.train);

  // hoist the per-inner-fold splits and scalers out of the grid loop
  struct InnerFold {
    std::vector<int> fit_idx, val_idx;
    clf::Standardizer scaler;
    std::vector<std::vector<double>> fit_rows, val_rows;
    std::vector<int> fit_labels, val_labels;
    bool usable = false;
  };
  std::vector<InnerFold> inner(inner_plan.size());
  for (size_t k = 0; k < inner_plan.size(); ++k) {
    const std::set<std::string> val_speakers(inner_plan[k].begin(), inner_plan[k].end());
    InnerFold &fold = inner[k];
    for (const int i : split.train)
      (val_speakers.count(samples[static_cast<size_t>(i)].speaker_id) ? fold.val_idx
                                                                      : fold.fit_idx)
          .push_back(i);
    fold.fit_labels = gather_labels(samples, fold.fit_idx);
    fold.val_labels = gather_labels(samples, fold.val_idx);
    if (fold.val_idx.empty() || !two_per_class(fold.fit_labels)) continue;
    fold.scaler = clf::Standardizer::fit(gather_rows(x, fold.fit_idx));
    fold.fit_rows = fold.scaler.transform_all(gather_rows(x, fold.fit_idx));
    fold.val_rows = fold.scaler.transform_all(gather_rows(x, fold.val_idx));
    fold.usable = true;
  }

  double best_acc = -1.0;
  double best_c = opt.svm_c_grid.front();
  double best_gamma = opt.svm_gamma_grid.front();
  for (const double c : opt.svm_c_grid) {
    for (const double gamma : opt.svm_gamma_grid) {
      double acc_sum = 0.0;
      int acc_count = 0;
      for (const InnerFold &fold : inner) {
        if (!fold.usable) continue;
        const clf::SvmModel model = clf::svm_train(fold.fit_rows, fold.fit_labels, c, gamma);
        int correct = 0;
        for (size_t i = 0; i < fold.val_rows.size(); ++i)
          if (clf::svm_predict(model, fold.val_rows[i]) == fold.val_labels[i]) ++correct;
        acc_sum += static_cast<double>(correct) / static_cast<double>(fold.val_rows.size());
        ++acc_count;
      }
      if (acc_count == 0) continue;
      const double mean_acc = acc_sum / acc_count;
      if (mean_acc > best_acc) {
        best_acc = mean_acc;
        best_c = c;
        best_gamma = gamma;
      }
    }
  }

  // refit on the full outer-train split
  const clf::Standardizer scaler = clf::Standardizer::fit(gather_rows(x, split.train));
  clf::SvmModel model =
      clf::svm_train(scaler.transform_all(gather_rows(x, split.train)), train_labels, best_c,
                     best_gamma);

  FittedPath path;
  path.decisions.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    path.decisions[i] = clf::svm_score(model, scaler.transform(x[i]));

  std::vector<double> train_scores;
  train_scores.reserve(split.train.size());
  for (const int i : split.train) train_scores.push_back(path.decisions[static_cast<size_t>(i)]);
  const auto [pa, pb] = clf::platt_calibrate(train_scores, train_labels);
  path.platt_a = pa;
  path.platt_b = pb;

  std::ostringstream hp;
  hp << "C=" << best_c << " gamma=" << best_gamma;
  path.hyperparams = hp.str();
  return path;
}

FittedPath fit_mlp_path(const FeatureMatrix &x, const std::vector<SampleMeta> &samples,
                        const IndexSplit &split,
                        const std::vector<std::vector<std::string>> &inner_plan,
                        const CvOptions &opt, uint64_t seed) {
  const std::vector<int> train_labels = gather_labels(samples, split.train);

  // epoch budget selected by mean inner-fold accuracy
  std::vector<double> mean_curve(static_cast<size_t>(opt.mlp.max_epochs), 0.0);
  int curves = 0;
  for (size_t k = 0; k < inner_plan.size(); ++k) {
    const std::set<std::string> val_speakers(inner_plan[k].begin(), inner_plan[k].end());
    std::vector<int> fit_idx, val_idx;
    for (const int i : split.train)
      (val_speakers.count(samples[static_cast<size_t>(i)].speaker_id) ? val_idx : fit_idx)
          .push_back(i);
    const std::vector<int> fit_labels = gather_labels(samples, fit_idx);
    if (val_idx.empty() || !two_per_class(fit_labels)) continue;

    const clf::Standardizer scaler = clf::Standardizer::fit(gather_rows(x, fit_idx));
    const auto fit_rows = scaler.transform_all(gather_rows(x, fit_idx));
    const auto val_rows = scaler.transform_all(gather_rows(x, val_idx));
    const std::vector<int> val_labels = gather_labels(samples, val_idx);

    std::vector<double> curve;
    clf::mlp_train(fit_rows, fit_labels, opt.mlp,
                   derive_seed(seed, "mlp_inner_" + std::to_string(k)), -1, &val_rows,
                   &val_labels, &curve);
    for (size_t e = 0; e < curve.size(); ++e) mean_curve[e] += curve[e];
    ++curves;
  }

  int best_epochs = std::max(opt.mlp.max_epochs / 2, 1);
  if (curves > 0) {
    double best = -1.0;
    for (size_t e = 0; e < mean_curve.size(); ++e) {
      if (mean_curve[e] / curves > best) {
        best = mean_curve[e] / curves;
        best_epochs = static_cast<int>(e) + 1;
      }
    }
  }

  const clf::Standardizer scaler = clf::Standardizer::fit(gather_rows(x, split.train));
  const clf::MlpModel model =
      clf::mlp_train(scaler.transform_all(gather_rows(x, split.train)), train_labels, opt.mlp,
                     derive_seed(seed, "mlp_refit"), best_epochs);

  FittedPath path;
  path.decisions.resize(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    path.decisions[i] = clf::mlp_score(model, scaler.transform(x[i])) - 0.5;
  // the softmax probability is already calibrated; identity mapping below
  path.platt_a = 0.0;
  path.platt_b = 0.0;
  path.hyperparams = "epochs=" + std::to_string(best_epochs);
  return path;
}

double calibrated_score(const CvOptions &opt, const FittedPath &path, double decision) {
  if (opt.classifier == ClassifierKind::kMlp) return decision + 0.5;
  return clf::platt_probability(decision, path.platt_a, path.platt_b);
}

}  // namespace

EvalReport run_nested_cv(const Cohort &cohort, const std::vector<SampleMeta> &samples,
                         FoldFeatureProvider &provider, const CvOptions &options) {
  cohort.validate();
  if (samples.empty()) throw ValueError("run_nested_cv: no samples");
  for (const auto &s : samples) {
    const SpeakerInfo *info = cohort.find(s.speaker_id);
    if (info == nullptr)
      throw ValueError("run_nested_cv: sample speaker '" + s.speaker_id + "' not in cohort");
    if (info->label != s.label)
      throw ValueError("run_nested_cv: label mismatch for speaker '" + s.speaker_id + "'");
  }

  const int n_streams = provider.stream_count();
  switch (options.fusion) {
    case FusionMode::kNone:
    case FusionMode::kMultispectral:
      if (n_streams != 1)
        throw ValueError("run_nested_cv: fusion mode '" + fusion_name(options.fusion) +
                         "' expects exactly one feature stream, got " +
                         std::to_string(n_streams));
      break;
    case FusionMode::kEarly:
    case FusionMode::kLate:
      if (n_streams < 2)
        throw ValueError("run_nested_cv: fusion mode '" + fusion_name(options.fusion) +
                         "' needs at least two feature streams");
      break;
  }

  const FoldPlan plan =
      make_fold_plan(cohort, options.seed, options.outer_folds, options.inner_folds);

  EvalReport report;
  report.audit.resize(plan.outer_test.size());

  for (size_t f = 0; f < plan.outer_test.size(); ++f) {
    LeakageRecord &record = report.audit[f];
    record.test_speakers = plan.outer_test[f];

    const std::vector<std::string> train_speakers =
        plan.outer_train(static_cast<int>(f), cohort);
    std::vector<FeatureMatrix> streams =
        provider.features_for_fold(train_speakers, static_cast<int>(f), &record);
    if (static_cast<int>(streams.size()) != n_streams)
      throw ValueError("run_nested_cv: provider returned wrong stream count");
    for (const auto &stream : streams)
      if (stream.size() != samples.size())
        throw ValueError("run_nested_cv: provider features do not cover every sample");

    record.scaler_fit_speakers = train_speakers;
    record.grid_search_speakers = train_speakers;

    const std::set<std::string> test_set(plan.outer_test[f].begin(),
                                         plan.outer_test[f].end());
    const IndexSplit split = split_samples(samples, test_set);
    if (split.test.empty())
      throw ValueError("run_nested_cv: outer fold " + std::to_string(f) +
                       " has no test segments");
    const auto &inner_plan = plan.inner_valid[f];
    const uint64_t fold_seed = derive_seed(options.seed, "fold_" + std::to_string(f));

    std::vector<double> decisions(samples.size(), 0.0);
    FittedPath calib_path;
    std::string hyperparams;

    if (options.fusion == FusionMode::kLate) {
      // one classifier per stream, then hinge-SGD weights over stream scores
      std::vector<FittedPath> paths;
      std::ostringstream hp;
      for (size_t s = 0; s < streams.size(); ++s) {
        FittedPath p =
            options.classifier == ClassifierKind::kSvm
                ? fit_svm_path(streams[s], samples, split, inner_plan, options)
                : fit_mlp_path(streams[s], samples, split, inner_plan, options,
                               derive_seed(fold_seed, "stream_" + std::to_string(s)));
        if (s) hp << "; ";
        hp << "stream" << s << "(" << p.hyperparams << ")";
        paths.push_back(std::move(p));
      }

      std::vector<std::vector<double>> train_stream_scores(
          streams.size(), std::vector<double>(split.train.size()));
      for (size_t s = 0; s < streams.size(); ++s)
        for (size_t i = 0; i < split.train.size(); ++i)
          train_stream_scores[s][i] =
              paths[s].decisions[static_cast<size_t>(split.train[i])];

      const clf::FusionWeights weights = clf::learn_fusion_weights(
          train_stream_scores, gather_labels(samples, split.train),
          derive_seed(fold_seed, "late_fusion"));

      for (size_t i = 0; i < samples.size(); ++i) {
        std::vector<double> stream_scores(streams.size());
        for (size_t s = 0; s < streams.size(); ++s) stream_scores[s] = paths[s].decisions[i];
        decisions[i] = clf::late_fuse(weights, stream_scores);
      }

      // calibrate the fused decision on the training segments; the sigmoid
      // keeps the reported score in (0, 1) for either base classifier
      std::vector<double> train_fused;
      train_fused.reserve(split.train.size());
      for (const int i : split.train) train_fused.push_back(decisions[static_cast<size_t>(i)]);
      const auto [pa, pb] =
          clf::platt_calibrate(train_fused, gather_labels(samples, split.train));
      calib_path.platt_a = pa;
      calib_path.platt_b = pb;
      std::ostringstream whp;
      whp << hp.str() << "; w=[";
      for (size_t s = 0; s < weights.weights.size(); ++s) {
        if (s) whp << ",";
        whp << weights.weights[s];
      }
      whp << "]";
      hyperparams = whp.str();
    } else {
      FeatureMatrix fused;
      const FeatureMatrix *x = nullptr;
      if (options.fusion == FusionMode::kEarly) {
        fused.resize(samples.size());
        for (size_t i = 0; i < samples.size(); ++i) {
          std::vector<std::vector<double>> per_stream;
          per_stream.reserve(streams.size());
          for (const auto &stream : streams) per_stream.push_back(stream[i]);
          fused[i] = clf::early_fuse(per_stream);
        }
        x = &fused;
      } else {
        x = &streams[0];
      }

      calib_path = options.classifier == ClassifierKind::kSvm
                       ? fit_svm_path(*x, samples, split, inner_plan, options)
                       : fit_mlp_path(*x, samples, split, inner_plan, options, fold_seed);
      decisions = calib_path.decisions;
      hyperparams = calib_path.hyperparams;
    }

    // late fusion with SVM uses the fused Platt fit; standard paths carry
    // their own calibration
    auto calibrate = [&](double d) {
      if (options.fusion == FusionMode::kLate)
        return clf::platt_probability(d, calib_path.platt_a, calib_path.platt_b);
      return calibrated_score(options, calib_path, d);
    };

    // per-speaker aggregation over the fold's test segments
    std::vector<SampleMeta> test_metas;
    std::vector<double> test_scores;
    for (const int i : split.test) {
      test_metas.push_back(samples[static_cast<size_t>(i)]);
      test_scores.push_back(decisions[static_cast<size_t>(i)]);
    }
    const std::map<std::string, double> speaker_decisions = aggregate_per_speaker(
        test_metas, test_scores, options.aggregate_by_utterance_first);

    std::vector<double> fold_scores;
    std::vector<int> fold_predictions, fold_labels;
    for (const auto &speaker : plan.outer_test[f]) {
      auto it = speaker_decisions.find(speaker);
      if (it == speaker_decisions.end())
        throw ValueError("run_nested_cv: test speaker '" + speaker + "' has no segments");
      const SpeakerInfo *info = cohort.find(speaker);

      SpeakerScore score;
      score.speaker_id = speaker;
      score.label = info->label;
      score.fold = static_cast<int>(f);
      score.decision = it->second;
      score.calibrated = calibrate(it->second);
      score.prediction = it->second > 0.0 ? 1 : -1;
      score.severity = info->severity;
      report.speakers.push_back(score);

      fold_scores.push_back(score.calibrated);
      fold_predictions.push_back(score.prediction);
      fold_labels.push_back(score.label);
    }

    FoldResult result;
    result.metrics = compute_metrics(fold_scores, fold_predictions, fold_labels);
    result.n_test_speakers = static_cast<int>(fold_labels.size());
    result.hyperparams = hyperparams;
    report.folds.push_back(std::move(result));
  }

  for (const auto &fold : report.folds) {
    report.mean_metrics.accuracy += fold.metrics.accuracy;
    report.mean_metrics.precision += fold.metrics.precision;
    report.mean_metrics.recall += fold.metrics.recall;
    report.mean_metrics.auc += fold.metrics.auc;
  }
  const double nf = static_cast<double>(report.folds.size());
  report.mean_metrics.accuracy /= nf;
  report.mean_metrics.precision /= nf;
  report.mean_metrics.recall /= nf;
  report.mean_metrics.auc /= nf;

  // pooled severity correlation over every speaker that has a severity value
  std::vector<double> rho_scores, rho_severity;
  for (const auto &s : report.speakers) {
    if (!s.severity.has_value()) continue;
    rho_scores.push_back(s.calibrated);
    rho_severity.push_back(*s.severity);
  }
  report.rho_speaker_count = static_cast<int>(rho_scores.size());
  if (rho_scores.size() >= 3) {
    try {
      report.spearman_rho = spearman_rho(rho_scores, rho_severity);
    } catch (const ValueError &) {
      report.spearman_rho = std::nullopt;
    }
  }
  return report;
}

}  // namespace mspec::eval

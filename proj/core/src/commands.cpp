// core/src/commands.cpp

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

#include "mspec/commands.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "mspec/experiment.hpp"
#include "mspec/report_io.hpp"
#include "mspec/synth.hpp"

namespace fs = std::filesystem;

namespace mspec::pipeline {

namespace {

// shared experiment-config flags; CLI values override the config file
struct ConfigArgs {
  std::string config_path;
  std::string representations;
  std::string fusion;
  std::string classifier;
  std::string feature_set;
  int branches = 0;
  std::optional<uint64_t> seed;

  void attach(CLI::App *cmd) {
    cmd->add_option("--config", config_path, "experiment config file (key = value lines)");
    cmd->add_option("--representations", representations,
                    "comma list of wideband,narrowband,wavelet");
    cmd->add_option("--fusion", fusion, "none|early|late|multispectral");
    cmd->add_option("--branches", branches, "stream multiplicity for fusion modes (2 or 3)")
        ->check(CLI::Range(1, 3));
    cmd->add_option("--classifier", classifier, "svm|mlp");
    cmd->add_option("--feature-set", feature_set, "both|bottleneck|recon");
    cmd->add_option("--seed", seed, "master seed controlling all randomness");
  }

  ExperimentConfig build() const {
    ExperimentConfig config;
    if (!config_path.empty()) config = ExperimentConfig::from_file(config_path);
    if (!representations.empty()) config.set("representations", representations);
    if (!fusion.empty()) config.set("fusion", fusion);
    if (branches > 0) config.set("branches", std::to_string(branches));
    if (!classifier.empty()) config.set("classifier", classifier);
    if (!feature_set.empty()) config.set("feature_set", feature_set);
    if (seed.has_value()) config.seed = *seed;
    config.finalize();
    return config;
  }
};

std::map<std::string, std::string> run_info_for(const ExperimentConfig &config,
                                                const std::string &manifest_path) {
  std::string reps;
  for (size_t i = 0; i < config.representations.size(); ++i) {
    if (i) reps += ",";
    reps += repr::kind_name(config.representations[i].kind);
  }
  return {{"classifier", eval::classifier_name(config.classifier)},
          {"fusion", eval::fusion_name(config.fusion)},
          {"representations", reps},
          {"feature_set", cae::feature_set_name(config.feature_set)},
          {"seed", std::to_string(config.seed)},
          {"config_hash", config.hash()},
          {"manifest", manifest_path}};
}

int cmd_synth(const std::string &out_dir, int speakers, int utterances, double duration,
              const std::string &profile, uint64_t seed) {
  if (speakers < 2 || speakers % 2 != 0)
    throw ValueError("synth: --speakers must be an even count (half per class)");
  SynthSpec spec;
  spec.speakers_per_class = speakers / 2;
  spec.utterances_per_speaker = utterances;
  spec.utterance_seconds = duration;
  spec.profile = synth_profile_from_name(profile);
  const SynthResult result = synth_corpus(spec, seed, out_dir);
  std::cout << "wrote " << result.speaker_ids.size() << " speakers ("
            << spec.speakers_per_class << " per class) to " << out_dir << "\n"
            << "manifest: " << result.manifest_path << "\n";
  return 0;
}

int cmd_extract(const ConfigArgs &args, const std::string &manifest_path,
                const std::string &out_path) {
  const ExperimentConfig config = args.build();
  const Manifest manifest = parse_manifest(manifest_path);
  const ImageStore store = compute_images(manifest, config.representations);
  save_images(store, out_path);
  std::cout << "extracted " << store.samples.size() << " segments x " << store.specs.size()
            << " representation(s) to " << out_path << "\n";
  return 0;
}

int cmd_train_ae(const ConfigArgs &args, const std::string &images_path,
                 const std::string &out_path) {
  const ExperimentConfig config = args.build();
  const ImageStore store = load_images(images_path);

  std::vector<std::string> speakers;
  for (const auto &s : store.cohort.speakers) speakers.push_back(s.speaker_id);
  const std::vector<TrainedUnit> units =
      train_ae_units(store, config, speakers, derive_seed(config.seed, "train_ae_cmd"));

  ModelArchive archive;
  archive.seed = config.seed;
  archive.config_hash = config.hash();
  archive.fusion_mode = eval::fusion_name(config.fusion);
  archive.feature_set = cae::feature_set_name(config.feature_set);
  for (const auto &unit : units) {
    archive.cae_configs.push_back(unit.config);
    archive.graphs.push_back(unit.graph);
  }
  save_model(archive, out_path);

  std::cout << "trained " << units.size() << " autoencoder unit(s)\n";
  for (size_t u = 0; u < units.size(); ++u)
    std::cout << "  unit " << u << ": best epoch " << units[u].report.best_epoch
              << ", validation loss " << units[u].report.best_valid_loss << "\n";
  std::cout << "model: " << out_path << "\n";
  return 0;
}

int cmd_features(const std::string &images_path, const std::string &model_path,
                 const std::string &out_path, const std::string &feature_set_name) {
  const ImageStore store = load_images(images_path);
  const ModelArchive archive = load_model(model_path);
  if (archive.graphs.empty())
    throw ValueError("features: archive '" + model_path + "' holds no autoencoder");
  check_archive_branches(archive, store.specs);

  const cae::FeatureSet feature_set =
      cae::feature_set_from_name(feature_set_name.empty() ? archive.feature_set
                                                          : feature_set_name);
  FeatureTable table;
  table.samples = store.samples;
  for (size_t u = 0; u < archive.graphs.size(); ++u) {
    TrainedUnit unit;
    unit.config = archive.cae_configs[u];
    unit.graph = archive.graphs[u];
    table.blocks.push_back(unit_features(unit, store, feature_set));
  }
  save_features(table, out_path);
  std::cout << "wrote " << table.samples.size() << " feature rows (" << table.blocks.size()
            << " block(s)) to " << out_path << "\n";
  return 0;
}

// grid search for train-clf: speaker-stratified k-fold over the table
std::pair<double, double> pick_svm_cell(const FeatureTable &table,
                                        const std::vector<std::vector<double>> &rows,
                                        const ExperimentConfig &config) {
  eval::Cohort cohort;
  std::set<std::string> seen;
  for (const auto &m : table.samples)
    if (seen.insert(m.speaker_id).second)
      cohort.speakers.push_back({m.speaker_id, m.label, m.severity});

  int n_pos = 0, n_neg = 0;
  for (const auto &s : cohort.speakers) (s.label == 1 ? n_pos : n_neg)++;
  const int k = std::min({5, n_pos, n_neg});
  if (k < 2)
    throw ValueError("train-clf: too few speakers per class for grid search; pass "
                     "--svm-c/--svm-gamma explicitly");
  const eval::FoldPlan plan = make_fold_plan(cohort, config.seed, k, 2);

  std::vector<int> labels;
  for (const auto &m : table.samples) labels.push_back(m.label);

  double best_acc = -1.0, best_c = config.svm_c_grid.front(),
         best_gamma = config.svm_gamma_grid.front();
  for (const double c : config.svm_c_grid) {
    for (const double gamma : config.svm_gamma_grid) {
      double acc_sum = 0.0;
      int count = 0;
      for (const auto &val_speakers : plan.outer_test) {
        const std::set<std::string> val_set(val_speakers.begin(), val_speakers.end());
        std::vector<std::vector<double>> fit_rows, val_rows;
        std::vector<int> fit_labels, val_labels;
        for (size_t i = 0; i < table.samples.size(); ++i) {
          if (val_set.count(table.samples[i].speaker_id)) {
            val_rows.push_back(rows[i]);
            val_labels.push_back(labels[i]);
          } else {
            fit_rows.push_back(rows[i]);
            fit_labels.push_back(labels[i]);
          }
        }
        const clf::Standardizer scaler = clf::Standardizer::fit(fit_rows);
        const clf::SvmModel model =
            clf::svm_train(scaler.transform_all(fit_rows), fit_labels, c, gamma);
        int correct = 0;
        for (size_t i = 0; i < val_rows.size(); ++i)
          if (clf::svm_predict(model, scaler.transform(val_rows[i])) == val_labels[i])
            ++correct;
        acc_sum += static_cast<double>(correct) / static_cast<double>(val_rows.size());
        ++count;
      }
      if (count == 0) continue;
      if (acc_sum / count > best_acc) {
        best_acc = acc_sum / count;
        best_c = c;
        best_gamma = gamma;
      }
    }
  }
  return {best_c, best_gamma};
}

int cmd_train_clf(const ConfigArgs &args, const std::string &features_path,
                  const std::string &out_path, double svm_c, double svm_gamma) {
  const ExperimentConfig config = args.build();
  const FeatureTable table = load_features(features_path);

  std::vector<int> labels;
  for (const auto &m : table.samples) labels.push_back(m.label);

  ModelArchive archive;
  archive.seed = config.seed;
  archive.config_hash = config.hash();
  archive.fusion_mode = eval::fusion_name(config.fusion);
  archive.classifier_kind = eval::classifier_name(config.classifier);
  archive.feature_set = cae::feature_set_name(config.feature_set);

  // late fusion keeps one classifier per block; all other modes train one
  // classifier on the concatenated blocks
  std::vector<std::vector<std::vector<double>>> unit_rows;
  if (config.fusion == eval::FusionMode::kLate) {
    if (table.blocks.size() < 2)
      throw ValueError("train-clf: late fusion needs a multi-block feature file");
    unit_rows = table.blocks;
  } else {
    std::vector<std::vector<double>> rows(table.samples.size());
    for (size_t i = 0; i < table.samples.size(); ++i) {
      std::vector<std::vector<double>> streams;
      for (const auto &block : table.blocks) streams.push_back(block[i]);
      rows[i] = clf::early_fuse(streams);
    }
    unit_rows.push_back(std::move(rows));
  }

  std::vector<std::vector<double>> unit_scores;  // train decision per unit
  for (size_t u = 0; u < unit_rows.size(); ++u) {
    const clf::Standardizer scaler = clf::Standardizer::fit(unit_rows[u]);
    const auto scaled = scaler.transform_all(unit_rows[u]);
    archive.scalers.push_back(scaler);

    if (config.classifier == eval::ClassifierKind::kSvm) {
      double c = svm_c, gamma = svm_gamma;
      if (c <= 0.0 || gamma <= 0.0) {
        FeatureTable sub = table;  // grid over this unit's rows
        std::tie(c, gamma) = pick_svm_cell(sub, unit_rows[u], config);
      }
      clf::SvmModel model = clf::svm_train(scaled, labels, c, gamma);
      std::vector<double> scores(scaled.size());
      for (size_t i = 0; i < scaled.size(); ++i) scores[i] = clf::svm_score(model, scaled[i]);
      clf::platt_calibrate(model, scores, labels);
      unit_scores.push_back(std::move(scores));
      archive.svms.push_back(std::move(model));
      std::cout << "unit " << u << ": C=" << c << " gamma=" << gamma << "\n";
    } else {
      const clf::MlpModel model = clf::mlp_train(
          scaled, labels, config.mlp, derive_seed(config.seed, "train_clf_" + std::to_string(u)));
      std::vector<double> scores(scaled.size());
      for (size_t i = 0; i < scaled.size(); ++i)
        scores[i] = clf::mlp_score(model, scaled[i]) - 0.5;
      unit_scores.push_back(std::move(scores));
      archive.mlps.push_back(model);
    }
  }

  if (config.fusion == eval::FusionMode::kLate)
    archive.fusion_weights = clf::learn_fusion_weights(
        unit_scores, labels, derive_seed(config.seed, "train_clf_fusion"));

  save_model(archive, out_path);
  std::cout << "classifier: " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const ConfigArgs &args, const std::string &manifest_path,
                 const std::string &out_dir) {
  const ExperimentConfig config = args.build();
  const Manifest manifest = parse_manifest(manifest_path);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("evaluate: cannot create output directory '" + out_dir + "'");

  const ImageStore store = compute_images(manifest, config.representations);
  const eval::EvalReport report = run_experiment(store, config);

  const auto run_info = run_info_for(config, manifest_path);
  const fs::path base(out_dir);
  write_report_json(report, run_info, (base / "report.json").string());
  write_report_text(report, run_info, (base / "report.txt").string());

  std::cout << "mean accuracy " << report.mean_metrics.accuracy << ", mean AUC "
            << report.mean_metrics.auc;
  if (report.spearman_rho.has_value()) std::cout << ", rho " << *report.spearman_rho;
  std::cout << "\nreports: " << (base / "report.json").string() << ", "
            << (base / "report.txt").string() << "\n";
  return 0;
}

int cmd_report(const std::string &report_path) {
  std::map<std::string, std::string> run_info;
  const eval::EvalReport report = read_report_json(report_path, &run_info);
  std::cout << render_report_text(report, run_info);
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char *const *argv) {
  CLI::App app{"multi-spectral pathological speech modeling pipeline"};
  app.require_subcommand(1);

  // synth
  auto *synth = app.add_subcommand("synth", "generate a synthetic two-class corpus");
  std::string synth_out = "corpus";
  int synth_speakers = 40, synth_utterances = 1;
  double synth_duration = 2.0;
  std::string synth_profile = "standard";
  uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--speakers", synth_speakers, "total speaker count (half per class)");
  synth->add_option("--utterances", synth_utterances, "utterances per speaker");
  synth->add_option("--duration", synth_duration, "utterance length in seconds");
  synth->add_option("--profile", synth_profile, "standard|split");
  synth->add_option("--seed", synth_seed, "generator seed");

  // extract
  auto *extract = app.add_subcommand("extract", "compute time-frequency images");
  ConfigArgs extract_args;
  std::string extract_manifest, extract_out = "images.bin";
  extract_args.attach(extract);
  extract->add_option("--manifest", extract_manifest, "corpus manifest CSV")->required();
  extract->add_option("--out", extract_out, "output image store");

  // train-ae
  auto *train_ae = app.add_subcommand("train-ae", "train autoencoder(s) on an image store");
  ConfigArgs train_ae_args;
  std::string train_ae_images, train_ae_out = "ae.mspc";
  train_ae_args.attach(train_ae);
  train_ae->add_option("--images", train_ae_images, "image store from `extract`")->required();
  train_ae->add_option("--out", train_ae_out, "output model archive");

  // features
  auto *features = app.add_subcommand("features", "extract bottleneck/error features");
  std::string features_images, features_model, features_out = "features.csv";
  std::string features_set;
  features->add_option("--images", features_images, "image store")->required();
  features->add_option("--model", features_model, "autoencoder archive")->required();
  features->add_option("--out", features_out, "output feature CSV");
  features->add_option("--feature-set", features_set, "both|bottleneck|recon");

  // train-clf
  auto *train_clf = app.add_subcommand("train-clf", "train a classifier on features");
  ConfigArgs train_clf_args;
  std::string train_clf_features, train_clf_out = "clf.mspc";
  double train_clf_c = 0.0, train_clf_gamma = 0.0;
  train_clf_args.attach(train_clf);
  train_clf->add_option("--features", train_clf_features, "feature CSV")->required();
  train_clf->add_option("--out", train_clf_out, "output classifier archive");
  train_clf->add_option("--svm-c", train_clf_c, "fix the SVM box constraint");
  train_clf->add_option("--svm-gamma", train_clf_gamma, "fix the Gaussian kernel width");

  // evaluate
  auto *evaluate = app.add_subcommand(
      "evaluate", "run the full speaker-stratified nested cross-validation");
  ConfigArgs evaluate_args;
  std::string evaluate_manifest, evaluate_out = "results";
  evaluate_args.attach(evaluate);
  evaluate->add_option("--manifest", evaluate_manifest, "corpus manifest CSV")->required();
  evaluate->add_option("--out", evaluate_out, "output directory for reports");

  // report
  auto *report = app.add_subcommand("report", "render a machine-readable report");
  std::string report_path;
  report->add_option("--report", report_path, "report.json from `evaluate`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError &e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (synth->parsed())
      return cmd_synth(synth_out, synth_speakers, synth_utterances, synth_duration,
                       synth_profile, synth_seed);
    if (extract->parsed()) return cmd_extract(extract_args, extract_manifest, extract_out);
    if (train_ae->parsed()) return cmd_train_ae(train_ae_args, train_ae_images, train_ae_out);
    if (features->parsed())
      return cmd_features(features_images, features_model, features_out, features_set);
    if (train_clf->parsed())
      return cmd_train_clf(train_clf_args, train_clf_features, train_clf_out, train_clf_c,
                           train_clf_gamma);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args, evaluate_manifest, evaluate_out);
    if (report->parsed()) return cmd_report(report_path);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mspec::pipeline

// core/src/report_io.cpp

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

#include "mspec/report_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mspec/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mspec::pipeline {

namespace {

json metrics_to_json(const eval::BinaryMetrics &m) {
  return json{{"accuracy", m.accuracy},
              {"auc", m.auc},
              {"precision", m.precision},
              {"recall", m.recall}};
}

eval::BinaryMetrics metrics_from_json(const json &j) {
  eval::BinaryMetrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.auc = j.at("auc").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  return m;
}

void atomic_write(const std::string &path, const std::string &content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

}  // namespace

void write_report_json(const eval::EvalReport &report,
                       const std::map<std::string, std::string> &run_info,
                       const std::string &path) {
  json j;
  j["schema_version"] = 1;
  j["run"] = run_info;

  json folds = json::array();
  for (size_t f = 0; f < report.folds.size(); ++f) {
    json fold = metrics_to_json(report.folds[f].metrics);
    fold["fold"] = f;
    fold["n_test_speakers"] = report.folds[f].n_test_speakers;
    fold["hyperparams"] = report.folds[f].hyperparams;
    folds.push_back(fold);
  }
  j["folds"] = folds;
  j["mean"] = metrics_to_json(report.mean_metrics);

  if (report.spearman_rho.has_value())
    j["spearman_rho"] = *report.spearman_rho;
  else
    j["spearman_rho"] = nullptr;
  j["rho_speaker_count"] = report.rho_speaker_count;

  json speakers = json::array();
  for (const auto &s : report.speakers) {
    json row;
    row["speaker"] = s.speaker_id;
    row["label"] = s.label == 1 ? "patient" : "control";
    row["fold"] = s.fold;
    row["decision"] = s.decision;
    row["score"] = s.calibrated;
    row["prediction"] = s.prediction == 1 ? "patient" : "control";
    if (s.severity.has_value())
      row["severity"] = *s.severity;
    else
      row["severity"] = nullptr;
    speakers.push_back(row);
  }
  j["speakers"] = speakers;

  json audit = json::array();
  for (size_t f = 0; f < report.audit.size(); ++f) {
    const auto &rec = report.audit[f];
    json entry;
    entry["fold"] = f;
    entry["test_speakers"] = rec.test_speakers;
    entry["ae_train_speakers"] = rec.ae_train_speakers;
    entry["scaler_fit_speakers"] = rec.scaler_fit_speakers;
    entry["grid_search_speakers"] = rec.grid_search_speakers;
    audit.push_back(entry);
  }
  j["leakage_audit"] = audit;

  atomic_write(path, j.dump(2) + "\n");
}

eval::EvalReport read_report_json(const std::string &path,
                                  std::map<std::string, std::string> *run_info) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw FormatError("report '" + path + "' is not valid JSON: " + e.what());
  }

  eval::EvalReport report;
  try {
    if (run_info != nullptr)
      *run_info = j.at("run").get<std::map<std::string, std::string>>();
    for (const auto &fold : j.at("folds")) {
      eval::FoldResult result;
      result.metrics = metrics_from_json(fold);
      result.n_test_speakers = fold.at("n_test_speakers").get<int>();
      result.hyperparams = fold.at("hyperparams").get<std::string>();
      report.folds.push_back(std::move(result));
    }
    report.mean_metrics = metrics_from_json(j.at("mean"));
    if (!j.at("spearman_rho").is_null())
      report.spearman_rho = j.at("spearman_rho").get<double>();
    report.rho_speaker_count = j.at("rho_speaker_count").get<int>();
    for (const auto &row : j.at("speakers")) {
      eval::SpeakerScore s;
      s.speaker_id = row.at("speaker").get<std::string>();
      s.label = row.at("label").get<std::string>() == "patient" ? 1 : -1;
      s.fold = row.at("fold").get<int>();
      s.decision = row.at("decision").get<double>();
      s.calibrated = row.at("score").get<double>();
      s.prediction = row.at("prediction").get<std::string>() == "patient" ? 1 : -1;
      if (!row.at("severity").is_null()) s.severity = row.at("severity").get<double>();
      report.speakers.push_back(std::move(s));
    }
    for (const auto &entry : j.at("leakage_audit")) {
      eval::LeakageRecord rec;
      rec.test_speakers = entry.at("test_speakers").get<std::vector<std::string>>();
      rec.ae_train_speakers = entry.at("ae_train_speakers").get<std::vector<std::string>>();
      rec.scaler_fit_speakers =
          entry.at("scaler_fit_speakers").get<std::vector<std::string>>();
      rec.grid_search_speakers =
          entry.at("grid_search_speakers").get<std::vector<std::string>>();
      report.audit.push_back(std::move(rec));
    }
  } catch (const json::exception &e) {
    throw FormatError("report '" + path + "' does not match the report schema: " + e.what());
  }
  return report;
}

std::string render_report_text(const eval::EvalReport &report,
                               const std::map<std::string, std::string> &run_info) {
  std::ostringstream out;
  out << "evaluation report\n";
  for (const auto &[key, value] : run_info) out << "  " << key << ": " << value << "\n";
  out << "\n";
  out << std::fixed << std::setprecision(3);
  out << "fold   accuracy   auc     precision  recall   test_speakers  hyperparams\n";
  for (size_t f = 0; f < report.folds.size(); ++f) {
    const auto &m = report.folds[f].metrics;
    out << std::left << std::setw(7) << f << std::setw(11) << m.accuracy << std::setw(8)
        << m.auc << std::setw(11) << m.precision << std::setw(9) << m.recall << std::setw(15)
        << report.folds[f].n_test_speakers << report.folds[f].hyperparams << "\n";
  }
  const auto &mm = report.mean_metrics;
  out << std::left << std::setw(7) << "mean" << std::setw(11) << mm.accuracy << std::setw(8)
      << mm.auc << std::setw(11) << mm.precision << std::setw(9) << mm.recall << "\n\n";

  if (report.spearman_rho.has_value())
    out << "spearman rho (pooled per-speaker scores vs severity): " << *report.spearman_rho
        << " over " << report.rho_speaker_count << " speakers\n";
  else
    out << "spearman rho: undefined (fewer than 3 speakers with severity, or constant input)\n";

  out << "\nspeaker        label     fold  decision   score    prediction  severity\n";
  for (const auto &s : report.speakers) {
    out << std::left << std::setw(15) << s.speaker_id << std::setw(10)
        << (s.label == 1 ? "patient" : "control") << std::setw(6) << s.fold << std::right
        << std::setw(9) << s.decision << std::setw(9) << s.calibrated << "  " << std::left
        << std::setw(12) << (s.prediction == 1 ? "patient" : "control");
    if (s.severity.has_value())
      out << std::right << std::setw(8) << *s.severity;
    out << "\n";
  }
  return out.str();
}

void write_report_text(const eval::EvalReport &report,
                       const std::map<std::string, std::string> &run_info,
                       const std::string &path) {
  atomic_write(path, render_report_text(report, run_info));
}

}  // namespace mspec::pipeline

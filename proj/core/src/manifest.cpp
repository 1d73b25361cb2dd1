// core/src/manifest.cpp

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

#include "mspec/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mspec/errors.hpp"

namespace fs = std::filesystem;

namespace mspec::pipeline {

namespace {

constexpr const char *kHeader = "path,speaker,utterance,label,severity,alignments";

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void row_error(int row, const std::string &msg) {
  throw FormatError("manifest row " + std::to_string(row) + ": " + msg);
}

}  // namespace

eval::Cohort Manifest::cohort() const {
  eval::Cohort cohort;
  std::map<std::string, size_t> index;
  for (const auto &row : rows) {
    auto it = index.find(row.speaker_id);
    if (it == index.end()) {
      index[row.speaker_id] = cohort.speakers.size();
      cohort.speakers.push_back({row.speaker_id, row.label, row.severity});
    } else {
      const eval::SpeakerInfo &prev = cohort.speakers[it->second];
      if (prev.label != row.label)
        throw ValueError("manifest: speaker '" + row.speaker_id +
                         "' has conflicting labels across rows");
    }
  }
  return cohort;
}

Manifest parse_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path + "'");
  const fs::path base = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line)) throw FormatError("manifest '" + path + "' is empty");
  if (trim(line) != kHeader)
    throw FormatError("manifest '" + path + "': expected header '" + std::string(kHeader) +
                      "', got '" + trim(line) + "'");

  Manifest manifest;
  std::set<std::pair<std::string, std::string>> keys;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 6)
      row_error(row_no, "expected 6 comma-separated fields, got " +
                            std::to_string(fields.size()));

    ManifestRow row;
    const fs::path audio = fs::path(fields[0]).is_absolute()
                               ? fs::path(fields[0])
                               : base / fields[0];
    if (!fs::exists(audio)) row_error(row_no, "audio file '" + audio.string() + "' not found");
    row.audio_path = audio.string();

    row.speaker_id = fields[1];
    row.utterance_id = fields[2];
    if (row.speaker_id.empty() || row.utterance_id.empty())
      row_error(row_no, "speaker and utterance ids must be non-empty");
    if (!keys.insert({row.speaker_id, row.utterance_id}).second)
      row_error(row_no, "duplicate (speaker, utterance) pair ('" + row.speaker_id + "', '" +
                            row.utterance_id + "')");

    if (fields[3] == "patient") row.label = 1;
    else if (fields[3] == "control") row.label = -1;
    else row_error(row_no, "label must be 'patient' or 'control', got '" + fields[3] + "'");

    if (!fields[4].empty()) {
      double sev = 0.0;
      try {
        size_t used = 0;
        sev = std::stod(fields[4], &used);
        if (used != fields[4].size()) throw std::invalid_argument(fields[4]);
      } catch (const std::exception &) {
        row_error(row_no, "severity '" + fields[4] + "' is not a number");
      }
      if (sev < 0.0 || sev > eval::kSeverityMax)
        row_error(row_no, "severity " + fields[4] + " outside [0, 52]");
      row.severity = sev;
    }

    if (!fields[5].empty()) {
      const fs::path align =
          fs::path(fields[5]).is_absolute() ? fs::path(fields[5]) : base / fields[5];
      if (!fs::exists(align))
        row_error(row_no, "alignment file '" + align.string() + "' not found");
      row.alignment_path = align.string();
    }
    manifest.rows.push_back(std::move(row));
  }
  if (manifest.rows.empty())
    throw FormatError("manifest '" + path + "' contains no data rows");
  return manifest;
}

void write_manifest(const Manifest &manifest, const std::string &path) {
  const fs::path base = fs::path(path).parent_path();
  std::ostringstream out;
  out << kHeader << "\n";
  for (const auto &row : manifest.rows) {
    const fs::path audio(row.audio_path);
    out << fs::relative(audio, base.empty() ? fs::path(".") : base).generic_string() << ","
        << row.speaker_id << "," << row.utterance_id << ","
        << (row.label == 1 ? "patient" : "control") << ",";
    if (row.severity.has_value()) {
      std::ostringstream sev;
      sev << *row.severity;
      out << sev.str();
    }
    out << ",";
    if (row.alignment_path.has_value())
      out << fs::relative(fs::path(*row.alignment_path), base).generic_string();
    out << "\n";
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f << out.str();
  }
  fs::rename(tmp, path);
}

}  // namespace mspec::pipeline

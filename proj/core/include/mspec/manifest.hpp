// core/include/mspec/manifest.hpp

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

#ifndef MSPEC_MANIFEST_HPP_
#define MSPEC_MANIFEST_HPP_

#include <optional>
#include <string>
#include <vector>

#include "mspec/folds.hpp"

namespace mspec::pipeline {

// One corpus row. Relative audio/alignment paths are resolved against the
// manifest's own directory at parse time.
struct ManifestRow {
  std::string audio_path;
  std::string speaker_id;
  std::string utterance_id;
  int label = -1;  // +1 patient, -1 control
  std::optional<double> severity;
  std::optional<std::string> alignment_path;
};

struct Manifest {
  std::vector<ManifestRow> rows;

  eval::Cohort cohort() const;  // speakers with labels and severity
};

// CSV with the exact header `path,speaker,utterance,label,severity,alignments`.
// Errors carry the offending 1-based row number. Referenced files must exist.
Manifest parse_manifest(const std::string &path);

// Writer used by the synthetic corpus generator; paths are stored relative
// to the manifest location when possible.
void write_manifest(const Manifest &manifest, const std::string &path);

}  // namespace mspec::pipeline

#endif  // MSPEC_MANIFEST_HPP_

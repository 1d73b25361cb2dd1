// core/include/mspec/archive.hpp

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

#ifndef MSPEC_ARCHIVE_HPP_
#define MSPEC_ARCHIVE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mspec/cae.hpp"
#include "mspec/fusion.hpp"
#include "mspec/mlp.hpp"
#include "mspec/scaler.hpp"
#include "mspec/svm.hpp"

namespace mspec::pipeline {

class ArchiveError : public Error {
 public:
  enum class Kind { kBadMagic, kChecksum, kVersion, kParse, kShapeMismatch };

  ArchiveError(Kind kind, const std::string &msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Everything needed to re-run feature extraction and scoring: representation
// specs, trained autoencoder graph(s), normalization statistics, classifier
// parameters and Platt coefficients, plus provenance. Binary format: magic
// "MSPC", u32 version, payload, CRC-32 trailer.
struct ModelArchive {
  static constexpr uint32_t kCurrentVersion = 1;
  static constexpr char kMagic[5] = "MSPC";

  uint32_t version = kCurrentVersion;
  uint64_t seed = 0;
  std::string config_hash;

  std::string fusion_mode = "none";      // none|early|late|multispectral
  std::string classifier_kind = "none";  // none|svm|mlp
  std::string feature_set = "both";

  // For none/multispectral: one entry (the single or joint AE).
  // For early/late: one entry per representation stream.
  std::vector<cae::CAEConfig> cae_configs;
  std::vector<nn::ModelGraph> graphs;

  std::vector<clf::Standardizer> scalers;  // aligned with classifier units
  std::vector<clf::SvmModel> svms;
  std::vector<clf::MlpModel> mlps;
  std::optional<clf::FusionWeights> fusion_weights;
};

void save_model(const ModelArchive &archive, const std::string &path);
ModelArchive load_model(const std::string &path);

// Explicit shape compatibility check between an archive and the branch
// layout a caller expects (count and representation kinds, in order).
void check_archive_branches(const ModelArchive &archive,
                            const std::vector<repr::RepresentationSpec> &expected);

}  // namespace mspec::pipeline

#endif  // MSPEC_ARCHIVE_HPP_

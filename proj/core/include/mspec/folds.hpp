// core/include/mspec/folds.hpp

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

#ifndef MSPEC_FOLDS_HPP_
#define MSPEC_FOLDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mspec::eval {

constexpr double kSeverityMax = 52.0;

struct SpeakerInfo {
  std::string speaker_id;
  int label = -1;  // +1 patient, -1 control
  std::optional<double> severity;  // 0 (healthy) .. 52 (severe)
};

struct Cohort {
  std::vector<SpeakerInfo> speakers;

  void validate() const;  // unique ids, labels valid, severity in range
  const SpeakerInfo *find(const std::string &speaker_id) const;
};

// Speaker-disjoint, class-stratified nested fold plan. outer_test partitions
// all speakers; for each outer fold, inner_valid partitions the remaining
// (training) speakers.
struct FoldPlan {
  std::vector<std::vector<std::string>> outer_test;
  std::vector<std::vector<std::vector<std::string>>> inner_valid;  // [outer][inner]

  std::vector<std::string> outer_train(int fold, const Cohort &cohort) const;
};

FoldPlan make_fold_plan(const Cohort &cohort, uint64_t seed, int outer_folds = 10,
                        int inner_folds = 9);

}  // namespace mspec::eval

#endif  // MSPEC_FOLDS_HPP_

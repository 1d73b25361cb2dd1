// core/src/folds.cpp

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

#include "mspec/folds.hpp"

#include <algorithm>
#include <set>

#include "mspec/errors.hpp"
#include "mspec/rng.hpp"

namespace mspec::eval {

void Cohort::validate() const {
  std::set<std::string> seen;
  for (const auto &s : speakers) {
    if (s.speaker_id.empty()) throw ValueError("Cohort: empty speaker id");
    if (!seen.insert(s.speaker_id).second)
      throw ValueError("Cohort: duplicate speaker '" + s.speaker_id + "'");
    if (s.label != 1 && s.label != -1)
      throw ValueError("Cohort: speaker '" + s.speaker_id + "' has invalid label");
    if (s.severity.has_value() && (*s.severity < 0.0 || *s.severity > kSeverityMax))
      throw ValueError("Cohort: speaker '" + s.speaker_id + "' severity outside [0, 52]");
  }
}

const SpeakerInfo *Cohort::find(const std::string &speaker_id) const {
  for (const auto &s : speakers)
    if (s.speaker_id == speaker_id) return &s;
  return nullptr;
}

std::vector<std::string> FoldPlan::outer_train(int fold, const Cohort &cohort) const {
  const auto &test = outer_test.at(static_cast<size_t>(fold));
  std::set<std::string> test_set(test.begin(), test.end());
  std::vector<std::string> train;
  for (const auto &s : cohort.speakers)
    if (!test_set.count(s.speaker_id)) train.push_back(s.speaker_id);
  return train;
}

namespace {

// Shuffles each class separately, then deals speakers round-robin so every
// fold receives a near-equal share of both classes.
std::vector<std::vector<std::string>> stratified_deal(std::vector<std::string> patients,
                                                      std::vector<std::string> controls,
                                                      int n_folds, Rng &rng) {
  std::sort(patients.begin(), patients.end());
  std::sort(controls.begin(), controls.end());
  std::shuffle(patients.begin(), patients.end(), rng);
  std::shuffle(controls.begin(), controls.end(), rng);

  std::vector<std::vector<std::string>> folds(static_cast<size_t>(n_folds));
  for (size_t i = 0; i < patients.size(); ++i)
    folds[i % static_cast<size_t>(n_folds)].push_back(std::move(patients[i]));
  for (size_t i = 0; i < controls.size(); ++i)
    folds[i % static_cast<size_t>(n_folds)].push_back(std::move(controls[i]));
  for (auto &f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace

FoldPlan make_fold_plan(const Cohort &cohort, uint64_t seed, int outer_folds,
                        int inner_folds) {
  cohort.validate();
  if (outer_folds < 2 || inner_folds < 2)
    throw ValueError("make_fold_plan: need at least 2 outer and 2 inner folds");

  std::vector<std::string> patients, controls;
  for (const auto &s : cohort.speakers)
    (s.label == 1 ? patients : controls).push_back(s.speaker_id);

  if (static_cast<int>(patients.size()) < outer_folds ||
      static_cast<int>(controls.size()) < outer_folds)
    throw ValueError("make_fold_plan: need at least " + std::to_string(outer_folds) +
                     " speakers per class (got " + std::to_string(patients.size()) +
                     " patients, " + std::to_string(controls.size()) + " controls)");

  Rng rng = make_rng(seed, "fold_plan");
  FoldPlan plan;
  plan.outer_test = stratified_deal(patients, controls, outer_folds, rng);

  std::set<std::string> patient_set(patients.begin(), patients.end());
  plan.inner_valid.resize(plan.outer_test.size());
  for (size_t f = 0; f < plan.outer_test.size(); ++f) {
    std::set<std::string> test_set(plan.outer_test[f].begin(), plan.outer_test[f].end());
    std::vector<std::string> train_patients, train_controls;
    for (const auto &s : cohort.speakers) {
      if (test_set.count(s.speaker_id)) continue;
      (patient_set.count(s.speaker_id) ? train_patients : train_controls)
          .push_back(s.speaker_id);
    }
    if (static_cast<int>(train_patients.size()) < inner_folds ||
        static_cast<int>(train_controls.size()) < inner_folds)
      throw ValueError("make_fold_plan: outer fold " + std::to_string(f) +
                       " leaves fewer training speakers per class than inner folds");
    plan.inner_valid[f] = stratified_deal(train_patients, train_controls, inner_folds, rng);
  }
  return plan;
}

}  // namespace mspec::eval

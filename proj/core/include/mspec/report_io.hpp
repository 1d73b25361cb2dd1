// core/include/mspec/report_io.hpp

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

#ifndef MSPEC_REPORT_IO_HPP_
#define MSPEC_REPORT_IO_HPP_

#include <map>
#include <string>

#include "mspec/nested_cv.hpp"

namespace mspec::pipeline {

// Machine-readable report (JSON, schema_version 1, keys sorted; reruns with
// the same seed/config/manifest are byte-identical). run_info carries the
// experiment echo (classifier, fusion, representations, seed, config_hash).
void write_report_json(const eval::EvalReport &report,
                       const std::map<std::string, std::string> &run_info,
                       const std::string &path);

eval::EvalReport read_report_json(const std::string &path,
                                  std::map<std::string, std::string> *run_info = nullptr);

// Human-readable table.
std::string render_report_text(const eval::EvalReport &report,
                               const std::map<std::string, std::string> &run_info);

void write_report_text(const eval::EvalReport &report,
                       const std::map<std::string, std::string> &run_info,
                       const std::string &path);

}  // namespace mspec::pipeline

#endif  // MSPEC_REPORT_IO_HPP_

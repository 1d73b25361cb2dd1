// core/include/mspec/commands.hpp

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

#ifndef MSPEC_COMMANDS_HPP_
#define MSPEC_COMMANDS_HPP_

#include <iosfwd>

namespace mspec::pipeline {

// Entry point behind the mspec binary. Subcommands: synth, extract,
// train-ae, features, train-clf, evaluate, report. Returns 0 on success,
// 1 on runtime errors, 2 on usage errors.
int cli_dispatch(int argc, const char *const *argv);

}  // namespace mspec::pipeline

#endif  // MSPEC_COMMANDS_HPP_

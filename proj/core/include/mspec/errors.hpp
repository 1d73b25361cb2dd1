// core/include/mspec/errors.hpp

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

#ifndef MSPEC_ERRORS_HPP_
#define MSPEC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mspec {

// Root of the project's error hierarchy. Every throwing path in the library
// raises a subclass of this, so callers can catch mspec::Error at the CLI
// boundary and map it to a nonzero exit status.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// File system / stream failures.
class IoError : public Error {
 public:
  explicit IoError(const std::string &msg) : Error(msg) {}
};

// Malformed input content (bad CSV, bad config syntax, bad archive bytes).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string &msg) : Error(msg) {}
};

// Tensor/matrix dimension disagreement.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string &msg) : Error(msg) {}
};

// Semantically invalid argument values (out-of-range, non-finite, empty).
class ValueError : public Error {
 public:
  explicit ValueError(const std::string &msg) : Error(msg) {}
};

}  // namespace mspec

#endif  // MSPEC_ERRORS_HPP_

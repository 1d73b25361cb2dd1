// core/include/mspec/rng.hpp

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

#ifndef MSPEC_RNG_HPP_
#define MSPEC_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>

namespace mspec {

// splitmix64 finalizer; used to derive independent per-component seeds from
// one master seed without correlated std::mt19937_64 streams.
inline uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, used both for seed derivation tags and config hashing.
inline uint64_t fnv1a64(const std::string &s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for a named sub-stream (e.g. "adam_init", "fold_plan") of a run seed.
inline uint64_t derive_seed(uint64_t master, const std::string &tag) {
  return mix_seed(master ^ fnv1a64(tag));
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t master, const std::string &tag) {
  return Rng(derive_seed(master, tag));
}

}  // namespace mspec

#endif  // MSPEC_RNG_HPP_

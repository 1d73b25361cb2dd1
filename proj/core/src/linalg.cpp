// core/src/linalg.cpp

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

#include "mspec/linalg.hpp"

#include <algorithm>

namespace mspec::linalg {

void matmul(const double *a, const double *b, double *c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double *ci = c + static_cast<size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    const double *ai = a + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double *bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void matmul_abt(const double *a, const double *b, double *c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double *ai = a + static_cast<size_t>(i) * k;
    double *ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double *bj = b + static_cast<size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

void matmul_atb(const double *a, const double *b, double *c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double *ci = c + static_cast<size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    for (int p = 0; p < k; ++p) {
      const double av = a[static_cast<size_t>(p) * m + i];
      if (av == 0.0) continue;
      const double *bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

}  // namespace mspec::linalg

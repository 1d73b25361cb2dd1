// core/include/mspec/linalg.hpp

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

#ifndef MSPEC_LINALG_HPP_
#define MSPEC_LINALG_HPP_

#include <cstddef>

namespace mspec::linalg {

// Dense double-precision GEMM kernels used by the layer implementations.
// Each output element is accumulated by exactly one thread in a fixed
// k-order, so results are bit-identical regardless of the thread count.

// C[m x n] = A[m x k] * B[k x n]
void matmul(const double *a, const double *b, double *c, int m, int k, int n);

// C[m x n] = A[m x k] * B[n x k]^T
void matmul_abt(const double *a, const double *b, double *c, int m, int k, int n);

// C[m x n] = A[k x m]^T * B[k x n]
void matmul_atb(const double *a, const double *b, double *c, int m, int k, int n);

}  // namespace mspec::linalg

#endif  // MSPEC_LINALG_HPP_

/* Copyright (c) 2026 The hogformer-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>

#include <cblas.h>

namespace hogformer::detail {

// C (M x N) += op(A) (M x K) * op(B) (K x N), row-major.
inline void gemm_acc(bool trans_a, bool trans_b, std::int64_t M, std::int64_t N, std::int64_t K,
                     const float* A, const float* B, float* C) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
              static_cast<int>(M), static_cast<int>(N), static_cast<int>(K), 1.0f, A,
              static_cast<int>(trans_a ? M : K), B, static_cast<int>(trans_b ? K : N), 1.0f, C,
              static_cast<int>(N));
}

inline void gemm_acc(bool trans_a, bool trans_b, std::int64_t M, std::int64_t N, std::int64_t K,
                     const double* A, const double* B, double* C) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
              static_cast<int>(M), static_cast<int>(N), static_cast<int>(K), 1.0, A,
              static_cast<int>(trans_a ? M : K), B, static_cast<int>(trans_b ? K : N), 1.0, C,
              static_cast<int>(N));
}

}  // namespace hogformer::detail

// Copyright 2026 The qmri Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Row-major single-thread GEMM kernels sized for convolution lowering.
// Every kernel accumulates into C (C += ...). Reduction order is fixed, so
// results are reproducible run to run.

#include <algorithm>
#include <cstddef>

namespace qmri::nn::gemm {

inline constexpr std::size_t kBlockK = 128;

/// C[M x N] += A[M x K] * B[K x N]
template <typename T>
void nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
    for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
        const std::size_t k1 = std::min(k, k0 + kBlockK);
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            T* c0 = c + i * n;
            T* c1 = c0 + n;
            T* c2 = c1 + n;
            T* c3 = c2 + n;
            for (std::size_t p = k0; p < k1; ++p) {
                const T a0 = a[i * k + p];
                const T a1 = a[(i + 1) * k + p];
                const T a2 = a[(i + 2) * k + p];
                const T a3 = a[(i + 3) * k + p];
                const T* bp = b + p * n;
#pragma omp simd
                for (std::size_t j = 0; j < n; ++j) {
                    const T bv = bp[j];
                    c0[j] += a0 * bv;
                    c1[j] += a1 * bv;
                    c2[j] += a2 * bv;
                    c3[j] += a3 * bv;
                }
            }
        }
        for (; i < m; ++i) {
            T* ci = c + i * n;
            for (std::size_t p = k0; p < k1; ++p) {
                const T av = a[i * k + p];
                const T* bp = b + p * n;
#pragma omp simd
                for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
            }
        }
    }
}

/// C[M x N] += A[M x K] * B[N x K]^T
template <typename T>
void nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* ai = a + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const T* bj = b + j * k;
            T s = 0;
#pragma omp simd reduction(+ : s)
            for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
            c[i * n + j] += s;
        }
    }
}

/// C[M x N] += A[K x M]^T * B[K x N]
template <typename T>
void tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        T* c0 = c + i * n;
        T* c1 = c0 + n;
        T* c2 = c1 + n;
        T* c3 = c2 + n;
        for (std::size_t p = 0; p < k; ++p) {
            const T a0 = a[p * m + i];
            const T a1 = a[p * m + i + 1];
            const T a2 = a[p * m + i + 2];
            const T a3 = a[p * m + i + 3];
            const T* bp = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) {
                const T bv = bp[j];
                c0[j] += a0 * bv;
                c1[j] += a1 * bv;
                c2[j] += a2 * bv;
                c3[j] += a3 * bv;
            }
        }
    }
    for (; i < m; ++i) {
        T* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[p * m + i];
            const T* bp = b + p * n;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

}  // namespace qmri::nn::gemm

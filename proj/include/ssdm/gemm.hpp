#pragma once

#include <cstdint>

namespace ssdm {

// Row-major accumulating matrix kernels, C += op(A) * op(B). Loop order keeps
// the inner stride unit so the compiler can vectorize; summation order is
// fixed, so results are bitwise reproducible.

// C[m,n] += A[m,k] * B[k,n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (int64_t kk = 0; kk < k; ++kk) {
      const T av = arow[kk];
      const T* brow = b + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,k] += A[m,n] * B[k,n]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int64_t m, int64_t n, int64_t k) {
  for (int64_t i = 0; i < m; ++i) {
    const T* arow = a + i * n;
    T* crow = c + i * k;
    for (int64_t kk = 0; kk < k; ++kk) {
      const T* brow = b + kk * n;
      T acc(0);
      for (int64_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[kk] += acc;
    }
  }
}

// C[k,n] += A[m,k]^T * B[m,n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (int64_t kk = 0; kk < k; ++kk) {
      const T av = arow[kk];
      T* crow = c + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace ssdm

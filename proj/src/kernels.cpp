#include "ranmt/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ranmt::kern {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

// Work below this many flops is not worth forking threads for.
constexpr long long kParallelFlops = 64 * 1024;

inline void mm_row_nn(const real_t* a, const real_t* b, real_t* crow, int i, int k, int n,
                      bool accumulate) {
  if (!accumulate) std::memset(crow, 0, sizeof(real_t) * n);
  const real_t* arow = a + static_cast<size_t>(i) * k;
  for (int p = 0; p < k; ++p) {
    const real_t aik = arow[p];
    const real_t* brow = b + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
  }
}

inline void mm_row_nt(const real_t* a, const real_t* b, real_t* crow, int i, int k, int n,
                      bool accumulate) {
  const real_t* arow = a + static_cast<size_t>(i) * k;
  for (int j = 0; j < n; ++j) {
    const real_t* brow = b + static_cast<size_t>(j) * k;
    real_t acc = 0;
    for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
    crow[j] = accumulate ? crow[j] + acc : acc;
  }
}

inline void mm_row_tn(const real_t* a, const real_t* b, real_t* crow, int i, int m, int k, int n,
                      bool accumulate) {
  // A stored [k x m], use column i of A.
  if (!accumulate) std::memset(crow, 0, sizeof(real_t) * n);
  for (int p = 0; p < k; ++p) {
    const real_t aik = a[static_cast<size_t>(p) * m + i];
    const real_t* brow = b + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
  }
}

}  // namespace

void matmul_serial(const real_t* a, const real_t* b, real_t* c, int m, int k, int n,
                   bool trans_a, bool trans_b, bool accumulate) {
  assert(!(trans_a && trans_b));
  for (int i = 0; i < m; ++i) {
    real_t* crow = c + static_cast<size_t>(i) * n;
    if (trans_a)
      mm_row_tn(a, b, crow, i, m, k, n, accumulate);
    else if (trans_b)
      mm_row_nt(a, b, crow, i, k, n, accumulate);
    else
      mm_row_nn(a, b, crow, i, k, n, accumulate);
  }
}

void matmul_parallel(const real_t* a, const real_t* b, real_t* c, int m, int k, int n,
                     bool trans_a, bool trans_b, bool accumulate) {
  assert(!(trans_a && trans_b));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    real_t* crow = c + static_cast<size_t>(i) * n;
    if (trans_a)
      mm_row_tn(a, b, crow, i, m, k, n, accumulate);
    else if (trans_b)
      mm_row_nt(a, b, crow, i, k, n, accumulate);
    else
      mm_row_nn(a, b, crow, i, k, n, accumulate);
  }
}

void matmul(const real_t* a, const real_t* b, real_t* c, int m, int k, int n, bool trans_a,
            bool trans_b, bool accumulate) {
  const long long flops = 2LL * m * k * n;
  if (max_threads() > 1 && flops >= kParallelFlops && m > 1)
    matmul_parallel(a, b, c, m, k, n, trans_a, trans_b, accumulate);
  else
    matmul_serial(a, b, c, m, k, n, trans_a, trans_b, accumulate);
}

namespace {

inline void softmax_row(const real_t* x, real_t* y, int cols) {
  real_t mx = x[0];
  for (int j = 1; j < cols; ++j)
    if (x[j] > mx) mx = x[j];
  real_t sum = 0;
  for (int j = 0; j < cols; ++j) {
    y[j] = std::exp(x[j] - mx);
    sum += y[j];
  }
  const real_t inv = real_t(1) / sum;
  for (int j = 0; j < cols; ++j) y[j] *= inv;
}

}  // namespace

void softmax_rows_serial(const real_t* x, real_t* y, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    softmax_row(x + static_cast<size_t>(i) * cols, y + static_cast<size_t>(i) * cols, cols);
}

void softmax_rows_parallel(const real_t* x, real_t* y, int rows, int cols) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i)
    softmax_row(x + static_cast<size_t>(i) * cols, y + static_cast<size_t>(i) * cols, cols);
}

void softmax_rows(const real_t* x, real_t* y, int rows, int cols) {
  if (max_threads() > 1 && rows > 1 && static_cast<long long>(rows) * cols >= 16384)
    softmax_rows_parallel(x, y, rows, cols);
  else
    softmax_rows_serial(x, y, rows, cols);
}

void vtanh_serial(const real_t* x, real_t* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vtanh_parallel(const real_t* x, real_t* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] = std::tanh(x[i]);
}

void vtanh(const real_t* x, real_t* y, size_t n) {
  if (max_threads() > 1 && n >= 16384)
    vtanh_parallel(x, y, n);
  else
    vtanh_serial(x, y, n);
}

void vsigmoid_serial(const real_t* x, real_t* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = real_t(1) / (real_t(1) + std::exp(-x[i]));
}

void vsigmoid_parallel(const real_t* x, real_t* y, size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    y[i] = real_t(1) / (real_t(1) + std::exp(-x[i]));
}

void vsigmoid(const real_t* x, real_t* y, size_t n) {
  if (max_threads() > 1 && n >= 16384)
    vsigmoid_parallel(x, y, n);
  else
    vsigmoid_serial(x, y, n);
}

void vadd_inplace(const real_t* x, real_t* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += x[i];
}

}  // namespace ranmt::kern

#pragma once

#include <cstddef>

#include "ranmt/real.hpp"

namespace ranmt::kern {

// Dense row-major kernels. Every parallel variant assigns whole output
// elements to one thread and keeps the per-element accumulation order equal
// to the serial loop, so serial and parallel results are bit-identical and
// independent of the thread count. The serial variants are kept as the
// reference implementation for tests and the kernel benchmark.

// C[m x n] = op(A) * op(B), optionally accumulating into C.
// A is stored [m x k] (or [k x m] when trans_a); B is [k x n] (or [n x k]
// when trans_b). trans_a && trans_b is not supported.
void matmul_serial(const real_t* a, const real_t* b, real_t* c, int m, int k, int n,
                   bool trans_a, bool trans_b, bool accumulate);
void matmul_parallel(const real_t* a, const real_t* b, real_t* c, int m, int k, int n,
                     bool trans_a, bool trans_b, bool accumulate);
void matmul(const real_t* a, const real_t* b, real_t* c, int m, int k, int n,
            bool trans_a = false, bool trans_b = false, bool accumulate = false);

// Row-wise softmax with max subtraction.
void softmax_rows_serial(const real_t* x, real_t* y, int rows, int cols);
void softmax_rows_parallel(const real_t* x, real_t* y, int rows, int cols);
void softmax_rows(const real_t* x, real_t* y, int rows, int cols);

void vtanh_serial(const real_t* x, real_t* y, size_t n);
void vtanh_parallel(const real_t* x, real_t* y, size_t n);
void vtanh(const real_t* x, real_t* y, size_t n);

void vsigmoid_serial(const real_t* x, real_t* y, size_t n);
void vsigmoid_parallel(const real_t* x, real_t* y, size_t n);
void vsigmoid(const real_t* x, real_t* y, size_t n);

// y += x, elementwise
void vadd_inplace(const real_t* x, real_t* y, size_t n);

int max_threads();

}  // namespace ranmt::kern

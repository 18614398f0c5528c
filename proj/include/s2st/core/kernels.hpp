#pragma once

#include <cstddef>

namespace s2st::kernels {

// OpenMP-parallel dense kernels. Each output element is produced by exactly
// one thread with a fixed-order inner accumulation, so results are bitwise
// identical for any thread count (and to the serial reference in
// tests/support/reference.hpp).

// c = a (m x k) * b (k x n)
void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n);

// c = a (m x k) * b^T, b is (n x k)
void matmul_nt(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n);

// c = a^T * b, a is (m x k), b is (m x n), c is (k x n)
void matmul_tn(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n);

// y += alpha * x
void axpy(double* y, const double* x, double alpha, std::size_t n);

}  // namespace s2st::kernels

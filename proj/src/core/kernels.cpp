#include "s2st/core/kernels.hpp"

namespace s2st::kernels {

// Parallelism is over output rows (or output elements); every element is
// written by one thread with a left-to-right inner accumulation, so the result
// does not depend on the thread count. The `if` clauses skip thread startup
// for the tiny products that dominate desk-scale runs.

static constexpr std::size_t kParallelWork = 1u << 15;

void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n) {
  const bool par = m * k * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n) {
  const bool par = m * k * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
}

void matmul_tn(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n) {
  const bool par = m * k * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(k); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const double av = a[p * k + i];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void axpy(double* y, const double* x, double alpha, std::size_t n) {
  const bool par = n >= kParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    y[i] += alpha * x[i];
}

}  // namespace s2st::kernels

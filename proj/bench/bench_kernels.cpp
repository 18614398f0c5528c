// Timing comparison between the OpenMP kernels and the serial reference
// implementations used by the test suites. Build target: bench_kernels.

#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "s2st/core/array.hpp"
#include "s2st/core/kernels.hpp"
#include "s2st/core/rng.hpp"
#include "s2st/ctc/ctc.hpp"
#include "s2st/core/ops.hpp"
#include "support/reference.hpp"

using namespace s2st;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_matmul(std::size_t n, int reps) {
  Rng rng(1);
  Array a = Array::randn({n, n}, rng);
  Array b = Array::randn({n, n}, rng);
  Array c({n, n});
  double par = time_ms([&] { kernels::matmul(c.data(), a.data(), b.data(), n, n, n); }, reps);
  double ser = time_ms([&] { refimpl::matmul(c.data(), a.data(), b.data(), n, n, n); }, reps);
  std::printf("matmul %4zu^3            serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx\n",
              n, ser, par, ser / par);
}

void bench_batch_ctc(std::size_t batch, std::size_t t, std::size_t vocab, int reps) {
  Rng rng(2);
  std::vector<Array> lattices;
  std::vector<std::vector<int>> labels;
  for (std::size_t i = 0; i < batch; ++i) {
    ad::Graph g;
    lattices.push_back(ad::log_softmax(g.input(Array::randn({t, vocab + 1}, rng))).value());
    std::vector<int> lab;
    for (std::size_t j = 0; j < t / 2; ++j)
      lab.push_back(rng.uniform_int(1, static_cast<int>(vocab)));
    labels.push_back(lab);
  }
  std::vector<double> out(batch);
  double par = time_ms(
      [&] {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(batch); ++i)
          out[static_cast<std::size_t>(i)] = ctc::ctc_loss_value(
              lattices[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(i)]);
      },
      reps);
  double ser = time_ms(
      [&] {
        for (std::size_t i = 0; i < batch; ++i)
          out[i] = ctc::ctc_loss_value(lattices[i], labels[i]);
      },
      reps);
  std::printf("ctc batch %3zu (T=%zu,V=%zu)  serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx\n",
              batch, t, vocab, ser, par, ser / par);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  bench_matmul(64, 50);
  bench_matmul(128, 20);
  bench_matmul(256, 5);
  bench_matmul(512, 2);
  bench_batch_ctc(32, 48, 64, 10);
  return 0;
}

#include "support/reference.hpp"

#include <algorithm>
#include <cmath>

namespace refimpl {

void matmul(double* c, const double* a, const double* b,
            std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

void matmul_nt(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
}

void matmul_tn(double* c, const double* a, const double* b,
               std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < m; ++p) acc += a[p * k + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return std::log(1.0 + std::exp(x)); }

std::vector<double> affine(const s2st::Array& w, const std::vector<double>& x,
                           const s2st::Array& b) {
  const std::size_t out = w.rows(), in = w.cols();
  std::vector<double> y(out, 0.0);
  for (std::size_t r = 0; r < out; ++r) {
    double acc = b[r];
    for (std::size_t c = 0; c < in; ++c) acc += w.at(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

std::vector<double> layer_norm(const std::vector<double>& x, const s2st::Array& gain,
                               const s2st::Array& bias, double eps) {
  const std::size_t d = x.size();
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(d);
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= static_cast<double>(d);
  double inv = 1.0 / std::sqrt(var + eps);
  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = (x[i] - mu) * inv * gain[i] + bias[i];
  return y;
}

std::size_t edit_distance_full(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  return d[n][m];
}

}  // namespace refimpl

#include "s2st/core/array.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "s2st/core/rng.hpp"
#include "s2st/error.hpp"

namespace s2st {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}
}  // namespace

Array::Array(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Array::Array(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require_shape(data_.size() == shape_product(shape_),
                "data length does not match shape product");
}

Array Array::scalar(double v) { return Array({1, 1}, {v}); }

Array Array::zeros_like(const Array& other) { return Array(other.shape_); }

Array Array::randn(std::vector<std::size_t> shape, Rng& rng, double stddev) {
  Array a(std::move(shape));
  for (double& x : a.data_) x = rng.normal(0.0, stddev);
  return a;
}

Array Array::full(std::vector<std::size_t> shape, double v) {
  Array a(std::move(shape));
  a.fill(v);
  return a;
}

std::size_t Array::rows() const {
  require_shape(ndim() == 2, "rows() on non-2d array " + shape_str(*this));
  return shape_[0];
}

std::size_t Array::cols() const {
  require_shape(ndim() == 2, "cols() on non-2d array " + shape_str(*this));
  return shape_[1];
}

double& Array::at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
double Array::at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

void Array::fill(double v) {
  for (double& x : data_) x = v;
}

double Array::item() const {
  require_shape(size() == 1, "item() on array of size " + std::to_string(size()));
  return data_[0];
}

bool Array::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string shape_str(const Array& a) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    if (i) os << "x";
    os << a.shape()[i];
  }
  os << ")";
  return os.str();
}

void require_shape(bool cond, const std::string& what) {
  if (!cond) throw ShapeError("shape mismatch: " + what);
}

}  // namespace s2st

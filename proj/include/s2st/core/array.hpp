#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace s2st {

class Rng;

/// Dense row-major array of 64-bit floats.
class Array {
 public:
  Array() = default;
  explicit Array(std::vector<std::size_t> shape);  // zero-filled
  Array(std::vector<std::size_t> shape, std::vector<double> data);

  static Array scalar(double v);
  static Array zeros_like(const Array& other);
  static Array randn(std::vector<std::size_t> shape, Rng& rng, double stddev = 1.0);
  static Array full(std::vector<std::size_t> shape, double v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // 2-d accessors; most of the stack works on matrices (vectors are 1xN).
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  bool same_shape(const Array& other) const { return shape_ == other.shape_; }
  void fill(double v);
  double item() const;  // requires size() == 1
  bool all_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_str(const Array& a);

// Throws ShapeError with a descriptive message when the condition fails.
void require_shape(bool cond, const std::string& what);

}  // namespace s2st

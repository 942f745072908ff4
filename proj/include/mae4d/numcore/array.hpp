// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mae4d::numcore {

using Shape = std::vector<std::size_t>;

/// Thrown when operands do not conform to an op's shape rule.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_string(const Shape& shape);
std::size_t numel(const Shape& shape);

/// Dense row-major block of 64-bit reals.
///
/// A default-constructed Array is "empty" (no data, used for absent
/// gradients). A scalar has rank 0 and one element. Every extent of a
/// non-empty array is at least 1.
class Array {
 public:
  Array() = default;
  explicit Array(Shape shape, double fill = 0.0);
  Array(Shape shape, std::vector<double> data);

  static Array scalar(double value);
  static Array from(std::initializer_list<double> values);

  bool empty() const { return data_.empty(); }
  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const double* ptr() const { return data_.data(); }
  double* ptr() { return data_.data(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  /// Multi-index access, bounds-checked.
  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  double item() const;

  Array reshaped(Shape shape) const;

  std::vector<double>& storage() { return data_; }

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

bool same_shape(const Array& a, const Array& b);

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Array& a, const Array& b);

/// Row-major permutation of axes: out.shape[i] = in.shape[axes[i]].
Array permute(const Array& in, const std::vector<std::size_t>& axes);

}  // namespace mae4d::numcore

// SPDX-License-Identifier: Apache-2.0
#include "mae4d/numcore/array.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mae4d::numcore {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {
void check_extents(const Shape& shape) {
  for (auto e : shape) {
    if (e == 0) throw ShapeError("Array: zero extent in shape " + to_string(shape));
  }
}
}  // namespace

Array::Array(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(numel(shape_), fill);
}

Array::Array(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (numel(shape_) != data_.size()) {
    throw ShapeError("Array: shape " + to_string(shape_) + " needs " + std::to_string(numel(shape_)) +
                     " elements, got " + std::to_string(data_.size()));
  }
}

Array Array::scalar(double value) { return Array(Shape{}, std::vector<double>{value}); }

Array Array::from(std::initializer_list<double> values) {
  return Array(Shape{values.size()}, std::vector<double>(values));
}

std::size_t Array::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("Array::at: rank " + std::to_string(index.size()) + " index into " + to_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape_[axis]) throw std::out_of_range("Array::at: index out of range for " + to_string(shape_));
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double Array::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }
double& Array::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

double Array::item() const {
  if (data_.size() != 1) throw ShapeError("Array::item: not a scalar, shape " + to_string(shape_));
  return data_[0];
}

Array Array::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw ShapeError("reshape: cannot view " + to_string(shape_) + " as " + to_string(shape));
  }
  return Array(std::move(shape), data_);
}

bool same_shape(const Array& a, const Array& b) { return a.shape() == b.shape(); }

double max_abs_diff(const Array& a, const Array& b) {
  if (!same_shape(a, b)) throw ShapeError("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Array permute(const Array& in, const std::vector<std::size_t>& axes) {
  const std::size_t r = in.rank();
  if (axes.size() != r) throw ShapeError("permute: axes do not match rank of " + to_string(in.shape()));
  std::vector<bool> seen(r, false);
  for (auto a : axes) {
    if (a >= r || seen[a]) throw ShapeError("permute: invalid axis list for " + to_string(in.shape()));
    seen[a] = true;
  }
  Shape out_shape(r);
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in.dim(i);
  std::vector<std::size_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = in.dim(axes[i]);
    src_stride[i] = in_strides[axes[i]];
  }
  Array out(out_shape);
  if (r == 0) {
    out[0] = in[0];
    return out;
  }
  // Odometer over the output index; the innermost axis is copied in a tight loop.
  std::vector<std::size_t> idx(r, 0);
  const std::size_t inner = out_shape[r - 1];
  const std::size_t inner_stride = src_stride[r - 1];
  const double* src = in.ptr();
  double* dst = out.ptr();
  const std::size_t outer = out.size() / inner;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t base = 0;
    for (std::size_t i = 0; i + 1 < r; ++i) base += idx[i] * src_stride[i];
    for (std::size_t j = 0; j < inner; ++j) dst[j] = src[base + j * inner_stride];
    dst += inner;
    for (std::size_t i = r - 1; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

}  // namespace mae4d::numcore

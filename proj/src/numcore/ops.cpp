// SPDX-License-Identifier: Apache-2.0
#include "mae4d/numcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mae4d::numcore {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }
bool wants(Node& n, std::size_t i) { return n.parents[i]->requires_grad; }

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " + to_string(b));
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

// Result shape of a broadcasting elementwise op, or throws.
Shape broadcast_shape(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return a;
  const std::size_t na = numel(a);
  const std::size_t nb = numel(b);
  if (nb == 1 && na >= 1) return a;
  if (na == 1) return b;
  if (is_suffix(b, a)) return a;
  if (is_suffix(a, b)) return b;
  shape_fail(op, a, b);
}

// Sums a gradient of `n_out` elements down to an operand of `n_in` elements
// that was tiled over leading axes.
Array reduce_tiled(const Array& g, const Shape& target) {
  const std::size_t n_in = numel(target);
  if (g.size() == n_in) return g.reshaped(target);
  Array out(target, 0.0);
  double* dst = out.ptr();
  const double* src = g.ptr();
  for (std::size_t base = 0; base < g.size(); base += n_in) {
    for (std::size_t j = 0; j < n_in; ++j) dst[j] += src[base + j];
  }
  return out;
}

template <typename F>
Array apply_binary(const Array& a, const Array& b, const Shape& out_shape, F f) {
  Array out(out_shape);
  const std::size_t n = out.size();
  const std::size_t sa = a.size();
  const std::size_t sb = b.size();
  double* o = out.ptr();
  const double* pa = a.ptr();
  const double* pb = b.ptr();
  if (sa == n && sb == n) {
    for (std::size_t i = 0; i < n; ++i) o[i] = f(pa[i], pb[i]);
  } else if (sa == n) {
    for (std::size_t base = 0; base < n; base += sb)
      for (std::size_t j = 0; j < sb; ++j) o[base + j] = f(pa[base + j], pb[j]);
  } else {
    for (std::size_t base = 0; base < n; base += sa)
      for (std::size_t j = 0; j < sa; ++j) o[base + j] = f(pa[j], pb[base + j]);
  }
  return out;
}

// Tiles `x` up to `n` elements (inverse of reduce_tiled's layout).
double tiled(const Array& x, std::size_t i) { return x[i % x.size()]; }

template <typename F, typename D>
Var unary(const char* op, const Var& x, F f, D dfdx) {
  const Array& xv = x.value();
  Array out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return make_result(op, std::move(out), {x}, [dfdx](Node& self) {
    Node& p = parent(self, 0);
    Array& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * dfdx(p.value[i], self.value[i]);
  });
}

std::size_t prod(const Shape& s, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t i = from; i < to; ++i) p *= s[i];
  return p;
}

}  // namespace

double gelu_scalar(double x) { return 0.5 * x * std::erfc(-x / std::numbers::sqrt2); }

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Var add(const Var& a, const Var& b) {
  const Shape out_shape = broadcast_shape("add", a.shape(), b.shape());
  Array out = apply_binary(a.value(), b.value(), out_shape, [](double x, double y) { return x + y; });
  return make_result("add", std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (wants(self, k)) parent(self, k).accumulate(reduce_tiled(self.grad, parent(self, k).value.shape()));
    }
  });
}

Var sub(const Var& a, const Var& b) {
  const Shape out_shape = broadcast_shape("sub", a.shape(), b.shape());
  Array out = apply_binary(a.value(), b.value(), out_shape, [](double x, double y) { return x - y; });
  return make_result("sub", std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) parent(self, 0).accumulate(reduce_tiled(self.grad, parent(self, 0).value.shape()));
    if (wants(self, 1)) {
      Array g = reduce_tiled(self.grad, parent(self, 1).value.shape());
      for (auto& v : g.data()) v = -v;
      parent(self, 1).accumulate(g);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  const Shape out_shape = broadcast_shape("mul", a.shape(), b.shape());
  Array out = apply_binary(a.value(), b.value(), out_shape, [](double x, double y) { return x * y; });
  return make_result("mul", std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!wants(self, k)) continue;
      const Array& other = parent(self, 1 - k).value;
      Array g(self.grad.shape());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * tiled(other, i);
      parent(self, k).accumulate(reduce_tiled(g, parent(self, k).value.shape()));
    }
  });
}

Var scale(const Var& x, double factor) {
  return unary("scale", x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var add_scalar(const Var& x, double offset) {
  return unary("add_scalar", x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var matmul(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2) shape_fail("matmul", sa, sb);
  const std::size_t M = sa[sa.size() - 2];
  const std::size_t K = sa.back();
  const std::size_t N = sb.back();
  if (sb[sb.size() - 2] != K) shape_fail("matmul", sa, sb);
  const bool shared = sb.size() == 2;
  if (!shared && (sb.size() != sa.size() || !std::equal(sa.begin(), sa.end() - 2, sb.begin()))) {
    shape_fail("matmul", sa, sb);
  }
  const std::size_t batch = prod(sa, 0, sa.size() - 2);
  Shape out_shape = sa;
  out_shape.back() = N;
  Array out(out_shape);
  if (shared) {
    MutMap(out.ptr(), batch * M, N).noalias() = ConstMap(a.value().ptr(), batch * M, K) * ConstMap(b.value().ptr(), K, N);
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      MutMap(out.ptr() + i * M * N, M, N).noalias() =
          ConstMap(a.value().ptr() + i * M * K, M, K) * ConstMap(b.value().ptr() + i * K * N, K, N);
    }
  }
  return make_result("matmul", std::move(out), {a, b}, [shared, batch, M, K, N](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    const double* g = self.grad.ptr();
    if (shared) {
      ConstMap G(g, batch * M, N);
      if (pa.requires_grad) {
        Array& ga = pa.grad_buffer();
        MutMap(ga.ptr(), batch * M, K).noalias() += G * ConstMap(pb.value.ptr(), K, N).transpose();
      }
      if (pb.requires_grad) {
        Array& gb = pb.grad_buffer();
        MutMap(gb.ptr(), K, N).noalias() += ConstMap(pa.value.ptr(), batch * M, K).transpose() * G;
      }
      return;
    }
    for (std::size_t i = 0; i < batch; ++i) {
      ConstMap G(g + i * M * N, M, N);
      if (pa.requires_grad) {
        Array& ga = pa.grad_buffer();
        MutMap(ga.ptr() + i * M * K, M, K).noalias() += G * ConstMap(pb.value.ptr() + i * K * N, K, N).transpose();
      }
      if (pb.requires_grad) {
        Array& gb = pb.grad_buffer();
        MutMap(gb.ptr() + i * K * N, K, N).noalias() += ConstMap(pa.value.ptr() + i * M * K, M, K).transpose() * G;
      }
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) { return add(matmul(x, w), b); }

Var reshape(const Var& x, Shape shape) {
  Array out = x.value().reshaped(std::move(shape));
  return make_result("reshape", std::move(out), {x}, [](Node& self) {
    Node& p = parent(self, 0);
    p.accumulate(self.grad.reshaped(p.value.shape()));
  });
}

Var permute(const Var& x, std::vector<std::size_t> axes) {
  Array out = numcore::permute(x.value(), axes);
  std::vector<std::size_t> inverse(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) inverse[axes[i]] = i;
  return make_result("permute", std::move(out), {x}, [inverse](Node& self) {
    parent(self, 0).accumulate(numcore::permute(self.grad, inverse));
  });
}

Var transpose(const Var& x, std::size_t axis0, std::size_t axis1) {
  const std::size_t r = x.value().rank();
  if (axis0 >= r || axis1 >= r) {
    throw ShapeError("transpose: axes " + std::to_string(axis0) + "," + std::to_string(axis1) + " invalid for " +
                     to_string(x.shape()));
  }
  std::vector<std::size_t> axes(r);
  for (std::size_t i = 0; i < r; ++i) axes[i] = i;
  std::swap(axes[axis0], axes[axis1]);
  return permute(x, axes);
}

Var concat(const std::vector<Var>& xs, std::size_t axis) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  const Shape& s0 = xs[0].shape();
  if (axis >= s0.size()) throw ShapeError("concat: axis " + std::to_string(axis) + " invalid for " + to_string(s0));
  Shape out_shape = s0;
  out_shape[axis] = 0;
  std::vector<std::size_t> chunk(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Shape& s = xs[k].shape();
    if (s.size() != s0.size()) shape_fail("concat", s0, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != s0[i]) shape_fail("concat", s0, s);
    }
    out_shape[axis] += s[axis];
    chunk[k] = prod(s, axis, s.size());
  }
  const std::size_t outer = prod(s0, 0, axis);
  const std::size_t row = prod(out_shape, axis, out_shape.size());
  Array out(out_shape);
  std::size_t col = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double* src = xs[k].value().ptr();
    for (std::size_t o = 0; o < outer; ++o) std::copy_n(src + o * chunk[k], chunk[k], out.ptr() + o * row + col);
    col += chunk[k];
  }
  return make_result("concat", std::move(out), xs, [chunk, outer, row](Node& self) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      if (wants(self, k)) {
        Array& g = parent(self, k).grad_buffer();
        for (std::size_t o = 0; o < outer; ++o) {
          const double* src = self.grad.ptr() + o * row + c;
          double* dst = g.ptr() + o * chunk[k];
          for (std::size_t j = 0; j < chunk[k]; ++j) dst[j] += src[j];
        }
      }
      c += chunk[k];
    }
  });
}

Var slice(const Var& x, std::size_t axis, std::size_t start, std::size_t length) {
  const Shape& s = x.shape();
  if (axis >= s.size() || length == 0 || start + length > s[axis]) {
    throw ShapeError("slice: [" + std::to_string(start) + ", +" + std::to_string(length) + ") on axis " +
                     std::to_string(axis) + " of " + to_string(s));
  }
  Shape out_shape = s;
  out_shape[axis] = length;
  const std::size_t outer = prod(s, 0, axis);
  const std::size_t inner = prod(s, axis + 1, s.size());
  const std::size_t in_row = s[axis] * inner;
  const std::size_t out_row = length * inner;
  const std::size_t off = start * inner;
  Array out(out_shape);
  for (std::size_t o = 0; o < outer; ++o) std::copy_n(x.value().ptr() + o * in_row + off, out_row, out.ptr() + o * out_row);
  return make_result("slice", std::move(out), {x}, [outer, in_row, out_row, off](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      const double* src = self.grad.ptr() + o * out_row;
      double* dst = g.ptr() + o * in_row + off;
      for (std::size_t j = 0; j < out_row; ++j) dst[j] += src[j];
    }
  });
}

Var gather(const Var& x, const std::vector<std::size_t>& indices) {
  const Shape& s = x.shape();
  if (s.empty() || indices.empty()) throw ShapeError("gather: needs a non-scalar input and indices, got " + to_string(s));
  const std::size_t row = numel(s) / s[0];
  Shape out_shape = s;
  out_shape[0] = indices.size();
  Array out(out_shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= s[0]) {
      throw ShapeError("gather: index " + std::to_string(indices[i]) + " out of range for " + to_string(s));
    }
    std::copy_n(x.value().ptr() + indices[i] * row, row, out.ptr() + i * row);
  }
  return make_result("gather", std::move(out), {x}, [indices, row](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const double* src = self.grad.ptr() + i * row;
      double* dst = g.ptr() + indices[i] * row;
      for (std::size_t j = 0; j < row; ++j) dst[j] += src[j];
    }
  });
}

Var layer_norm(const Var& x, double eps) {
  const Array& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("layer_norm: scalar input");
  const std::size_t n = xv.shape().back();
  const std::size_t rows = xv.size() / n;
  Array out(xv.shape());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.ptr() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += in[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    double* o = out.ptr() + r * n;
    for (std::size_t j = 0; j < n; ++j) o[j] = (in[j] - mu) * inv;
  }
  return make_result("layer_norm", std::move(out), {x}, [inv_std, n, rows](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    const double dn = static_cast<double>(n);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* dy = self.grad.ptr() + r * n;
      const double* y = self.value.ptr() + r * n;
      double mean_dy = 0.0;
      double mean_dy_y = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        mean_dy += dy[j];
        mean_dy_y += dy[j] * y[j];
      }
      mean_dy /= dn;
      mean_dy_y /= dn;
      double* dx = g.ptr() + r * n;
      for (std::size_t j = 0; j < n; ++j) dx[j] += inv_std[r] * (dy[j] - mean_dy - y[j] * mean_dy_y);
    }
  });
}

Var softmax(const Var& x) {
  const Array& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("softmax: scalar input");
  const std::size_t n = xv.shape().back();
  const std::size_t rows = xv.size() / n;
  Array out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.ptr() + r * n;
    double* o = out.ptr() + r * n;
    const double m = *std::max_element(in, in + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(in[j] - m);
      total += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  return make_result("softmax", std::move(out), {x}, [n, rows](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* dy = self.grad.ptr() + r * n;
      const double* y = self.value.ptr() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += dy[j] * y[j];
      double* dx = g.ptr() + r * n;
      for (std::size_t j = 0; j < n; ++j) dx[j] += y[j] * (dy[j] - dot);
    }
  });
}

Var log_softmax(const Var& x) {
  const Array& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("log_softmax: scalar input");
  const std::size_t n = xv.shape().back();
  const std::size_t rows = xv.size() / n;
  Array out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.ptr() + r * n;
    double* o = out.ptr() + r * n;
    const double m = *std::max_element(in, in + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += std::exp(in[j] - m);
    const double lse = m + std::log(total);
    for (std::size_t j = 0; j < n; ++j) o[j] = in[j] - lse;
  }
  return make_result("log_softmax", std::move(out), {x}, [n, rows](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* dy = self.grad.ptr() + r * n;
      const double* y = self.value.ptr() + r * n;
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += dy[j];
      double* dx = g.ptr() + r * n;
      for (std::size_t j = 0; j < n; ++j) dx[j] += dy[j] - std::exp(y[j]) * total;
    }
  });
}

Var gelu(const Var& x) {
  return unary("gelu", x, gelu_scalar, [](double v, double) {
    const double cdf = 0.5 * std::erfc(-v / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + v * pdf;
  });
}

Var sigmoid(const Var& x) {
  return unary("sigmoid", x, sigmoid_scalar, [](double, double y) { return y * (1.0 - y); });
}

Var softplus(const Var& x) {
  return unary("softplus", x, softplus_scalar, [](double v, double) { return sigmoid_scalar(v); });
}

Var square(const Var& x) {
  return unary("square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var sqrt(const Var& x) {
  for (double v : x.value().data()) {
    if (v < 0.0) throw std::domain_error("sqrt: negative input");
  }
  return unary("sqrt", x, [](double v) { return std::sqrt(v); }, [](double, double y) { return 0.5 / y; });
}

Var abs(const Var& x) {
  return unary("abs", x, [](double v) { return std::abs(v); },
               [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var huber(const Var& x, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be positive");
  return unary(
      "huber", x,
      [delta](double e) {
        const double a = std::abs(e);
        return a < delta ? 0.5 * e * e / delta : a - 0.5 * delta;
      },
      [delta](double e, double) {
        if (std::abs(e) < delta) return e / delta;
        return e > 0.0 ? 1.0 : -1.0;
      });
}

Var bce_with_logits(const Var& logits, const Array& targets) {
  if (logits.shape() != targets.shape()) shape_fail("bce_with_logits", logits.shape(), targets.shape());
  const Array& z = logits.value();
  Array out(z.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::max(z[i], 0.0) - z[i] * targets[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  return make_result("bce_with_logits", std::move(out), {logits}, [targets](Node& self) {
    Node& p = parent(self, 0);
    Array& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (sigmoid_scalar(p.value[i]) - targets[i]);
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_result("sum", Array::scalar(total), {x}, [](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    const double d = self.grad[0];
    for (auto& v : g.data()) v += d;
  });
}

Var mean(const Var& x) {
  const double n = static_cast<double>(x.value().size());
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_result("mean", Array::scalar(total / n), {x}, [n](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    const double d = self.grad[0] / n;
    for (auto& v : g.data()) v += d;
  });
}

Var sum_last(const Var& x) {
  const Array& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("sum_last: scalar input");
  const std::size_t n = xv.shape().back();
  const std::size_t rows = xv.size() / n;
  Shape out_shape(xv.shape().begin(), xv.shape().end() - 1);
  Array out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += xv[r * n + j];
    out[r] = total;
  }
  return make_result("sum_last", std::move(out), {x}, [n, rows](Node& self) {
    Array& g = parent(self, 0).grad_buffer();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < n; ++j) g[r * n + j] += self.grad[r];
  });
}

}  // namespace mae4d::numcore

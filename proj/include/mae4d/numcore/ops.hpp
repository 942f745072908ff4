// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "mae4d/numcore/autodiff.hpp"

namespace mae4d::numcore {

// Shape rules
// -----------
// Elementwise binary ops (add, sub, mul): operands have equal shapes, or one
// operand's shape is a trailing suffix of the other's (it is tiled over the
// leading axes), or one operand holds a single element.
//
// matmul(a, b): a is [..., M, K]. If b is [K, N] it is shared across all
// leading axes of a. Otherwise b must be [..., K, N] with the same leading
// axes as a (batched). The result is [..., M, N].
//
// Reductions run sequentially in row-major order so results are
// reproducible bit for bit.

inline constexpr double kLayerNormEps = 1e-6;

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
Var add_scalar(const Var& x, double offset);

Var matmul(const Var& a, const Var& b);
/// x @ w + b for weights w [in, out] and bias b [out].
Var linear(const Var& x, const Var& w, const Var& b);

Var reshape(const Var& x, Shape shape);
Var permute(const Var& x, std::vector<std::size_t> axes);
Var transpose(const Var& x, std::size_t axis0, std::size_t axis1);
Var concat(const std::vector<Var>& xs, std::size_t axis);
Var slice(const Var& x, std::size_t axis, std::size_t start, std::size_t length);
/// Rows of x (along axis 0) selected by index; repeats allowed.
Var gather(const Var& x, const std::vector<std::size_t>& indices);

/// Normalises each row of the last axis to zero mean, unit variance
/// (population variance, eps kLayerNormEps). No affine part.
Var layer_norm(const Var& x, double eps = kLayerNormEps);
Var softmax(const Var& x);
Var log_softmax(const Var& x);

/// Exact GELU: x * Phi(x) with the Gaussian CDF.
Var gelu(const Var& x);
Var sigmoid(const Var& x);
Var softplus(const Var& x);
Var square(const Var& x);
Var sqrt(const Var& x);
Var abs(const Var& x);
/// Smooth-L1 Huber: e^2 / (2 delta) for |e| < delta, |e| - delta / 2 beyond.
Var huber(const Var& x, double delta);
/// Elementwise binary cross-entropy of logits against fixed targets in [0, 1].
Var bce_with_logits(const Var& logits, const Array& targets);

Var sum(const Var& x);
Var mean(const Var& x);
/// Sum over the last axis; the result drops that axis (rank-1 input gives a scalar).
Var sum_last(const Var& x);

// Scalar helpers shared with tests and oracles.
double gelu_scalar(double x);
double sigmoid_scalar(double x);
double softplus_scalar(double x);

}  // namespace mae4d::numcore

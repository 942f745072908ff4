// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mae4d/numcore/array.hpp"

namespace mae4d::numcore {

struct Node;

/// Handle to a value in the differentiation graph.
///
/// Values are immutable once created. Nodes that do not depend on any
/// gradient-requiring leaf carry no parents, so constant subgraphs (frozen
/// backbones, data) are never retained.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Array& value() const;
  const Array& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool defined() const { return static_cast<bool>(node_); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

using BackwardFn = std::function<void(Node&)>;

struct Node {
  Array value;
  Array grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward_fn;

  /// Adds `g` into this node's gradient, allocating it on first use.
  void accumulate(const Array& g);
  /// Mutable gradient buffer, zero-initialised on first use.
  Array& grad_buffer();
};

/// A value that never receives a gradient.
Var constant(Array value);
/// A differentiable leaf (parameter or input under test).
Var leaf(Array value);

/// Builds the result node of an op. When no input requires a gradient the
/// backward closure is dropped and the result is a constant.
Var make_result(const char* op, Array value, std::vector<Var> inputs, BackwardFn backward_fn);

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
/// reachable gradient-requiring node; call once per graph.
void backward(const Var& loss);

}  // namespace mae4d::numcore

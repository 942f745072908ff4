// SPDX-License-Identifier: Apache-2.0
#include "mae4d/numcore/autodiff.hpp"

#include <stdexcept>
#include <unordered_set>

namespace mae4d::numcore {

namespace {
const Array& empty_array() {
  static const Array kEmpty;
  return kEmpty;
}
}  // namespace

const Array& Var::value() const {
  if (!node_) throw std::logic_error("Var: use of undefined value");
  return node_->value;
}

const Array& Var::grad() const {
  if (!node_) throw std::logic_error("Var: use of undefined value");
  return node_->grad.empty() ? empty_array() : node_->grad;
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

void Node::accumulate(const Array& g) {
  if (g.shape() != value.shape()) {
    throw ShapeError(std::string("backward: gradient shape ") + to_string(g.shape()) + " for value " +
                     to_string(value.shape()) + " in op " + op);
  }
  if (grad.empty()) {
    grad = g;
    return;
  }
  double* dst = grad.ptr();
  const double* src = g.ptr();
  for (std::size_t i = 0; i < grad.size(); ++i) dst[i] += src[i];
}

Array& Node::grad_buffer() {
  if (grad.empty()) grad = Array(value.shape(), 0.0);
  return grad;
}

Var constant(Array value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "const";
  return Var(std::move(n));
}

Var leaf(Array value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

Var make_result(const char* op, Array value, std::vector<Var> inputs, BackwardFn backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  bool any = false;
  for (const auto& v : inputs) any = any || v.requires_grad();
  if (any) {
    n->requires_grad = true;
    n->parents.reserve(inputs.size());
    for (auto& v : inputs) n->parents.push_back(v.node());
    n->backward_fn = std::move(backward_fn);
  }
  return Var(std::move(n));
}

void backward(const Var& loss) {
  if (!loss.defined()) throw std::logic_error("backward: undefined loss");
  if (loss.value().size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " + to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order without recursion.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->accumulate(Array(loss.shape(), 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

}  // namespace mae4d::numcore

#pragma once

// Minimal reverse-mode automatic differentiation.
//
// A Tensor is a handle to a graph node holding values, an optional gradient
// and a backward rule that pushes the node's gradient into its parents.
// Nodes only reference their parents, so a graph is released as soon as the
// last handle to its output goes away. Leaves created with requires_grad
// (parameters) accumulate gradients across backward() calls until zeroed.

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "gprda/error.hpp"

namespace gprda::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " x " : "") + std::to_string(s[i]);
  return out;
}

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

/// Graph recording switch for the current thread.
inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

class NoGradGuard {
 public:
  NoGradGuard() : previous_(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    std::vector<double> v(numel(shape), 0.0);
    return from(std::move(shape), std::move(v), requires_grad);
  }

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
    if (numel(shape) != values.size()) {
      throw ShapeError("Tensor: shape " + shape_string(shape) + " does not match " +
                       std::to_string(values.size()) + " values");
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  std::vector<double>& grad_buffer() { return node_->grad_buffer(); }
  double item() const {
    if (size() != 1) throw ShapeError("item(): tensor has " + std::to_string(size()) + " elements");
    return node_->value[0];
  }

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& ptr() const { return node_; }

  void zero_grad() { node_->grad.clear(); }

  /// Same values, cut from the graph.
  Tensor detach() const { return from(shape(), node_->value, false); }

  /// Back-propagates from a single-element tensor.
  void backward() const {
    if (size() != 1) throw ShapeError("backward() needs a scalar, got shape " + shape_string(shape()));
    if (!requires_grad()) return;
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    // Iterative post-order DFS.
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        Node* p = n->parents[next++].get();
        if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
      } else {
        order.push_back(n);
        stack.pop_back();
      }
    }
    node_->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* n = *it;
      if (n->backward && !n->grad.empty()) n->backward(*n);
    }
  }

 private:
  std::shared_ptr<Node> node_;
};

/// Creates an op result. The backward rule is kept only when grad mode is on
/// and some parent requires a gradient.
inline Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                          std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  bool needs = false;
  if (grad_mode()) {
    for (const auto& p : parents) needs = needs || p.requires_grad();
  }
  n->requires_grad = needs;
  if (needs) {
    for (auto& p : parents) n->parents.push_back(p.ptr());
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

/// Gradient buffer of parent i if it takes gradients, else nullptr.
inline double* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? p.grad_buffer().data() : nullptr;
}

}  // namespace gprda::nn

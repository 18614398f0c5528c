#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "s2st/core/array.hpp"

namespace s2st::ad {

using s2st::Array;

/// Named trainable (or frozen) tensor living outside any graph. The trainer
/// accumulates gradients here across per-utterance graphs in a fixed order.
struct Param {
  std::string name;
  Array value;
  Array grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, Array v, bool t = true)
      : name(std::move(n)), value(std::move(v)), grad(Array::zeros_like(value)), trainable(t) {}

  void zero_grad() { grad.fill(0.0); }
};

class Graph;

/// Handle to a node of one Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  const Array& value() const;
  const Array& grad() const;
  bool requires_grad() const;
  bool defined() const { return g_ != nullptr; }
  Graph* graph() const { return g_; }
  int id() const { return id_; }

 private:
  friend class Graph;
  Var(Graph* g, int id) : g_(g), id_(id) {}
  Graph* g_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode tape. Nodes are recorded in topological order as ops execute;
/// backward() walks them once in reverse. A Graph is confined to one thread.
class Graph {
 public:
  using BackwardFn =
      std::function<void(Graph&, const Array& gout, const std::vector<int>& inputs)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Array value, bool requires_grad = false);
  Var constant(Array value) { return input(std::move(value), false); }

  /// Leaf bound to an external parameter (value copied in). want_grad chooses
  /// whether backward records a gradient for it; gradients still flow through
  /// either way.
  Var use(Param& p, bool want_grad);

  /// Record an op node. `backward` receives the node's output gradient and the
  /// input node ids; it must add into each needed input gradient.
  Var node(Array value, const std::vector<Var>& inputs, BackwardFn backward);

  /// Seeds d(root)/d(root) = 1 and runs every recorded backward rule in
  /// reverse order. root must be a scalar (size-1) node.
  void backward(const Var& root);

  /// For every bound param with a recorded gradient: p.grad += scale * g.
  /// Called serially by the trainer in fixed utterance order.
  void accumulate_param_grads(double scale);

  const Array& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Array& grad(int id) const;
  bool requires_grad(int id) const {
    return nodes_[static_cast<std::size_t>(id)].requires_grad;
  }

  /// nullptr when the node does not participate in differentiation; otherwise
  /// the lazily allocated, zero-initialized accumulator.
  Array* grad_if_needed(int id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Array value;
    Array grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;  // null for leaves
  };
  std::vector<Node> nodes_;
  std::vector<std::pair<int, Param*>> bound_;
};

}  // namespace s2st::ad

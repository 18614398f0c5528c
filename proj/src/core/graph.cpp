#include "s2st/core/graph.hpp"

#include "s2st/core/kernels.hpp"
#include "s2st/error.hpp"

namespace s2st::ad {

const Array& Var::value() const { return g_->value(id_); }
const Array& Var::grad() const { return g_->grad(id_); }
bool Var::requires_grad() const { return g_->requires_grad(id_); }

Var Graph::input(Array value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::use(Param& p, bool want_grad) {
  Var v = input(p.value, want_grad && p.trainable);
  bound_.emplace_back(v.id(), &p);
  return v;
}

Var Graph::node(Array value, const std::vector<Var>& inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    n.inputs.push_back(in.id());
    if (in.requires_grad()) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Array& Graph::grad(int id) const {
  static const Array kEmpty;
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.grad.empty() ? kEmpty : n.grad;
}

Array* Graph::grad_if_needed(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Array::zeros_like(n.value);
  return &n.grad;
}

void Graph::backward(const Var& root) {
  if (root.graph() != this) throw Error("backward: var belongs to another graph");
  Node& r = nodes_[static_cast<std::size_t>(root.id())];
  if (r.value.size() != 1) throw Error("backward: root must be scalar");
  if (!r.requires_grad) return;
  if (r.grad.empty()) r.grad = Array::zeros_like(r.value);
  r.grad[0] = 1.0;
  // Nodes are recorded in topological order, so a reverse index walk visits
  // each node exactly once after everything that consumes it.
  for (int i = root.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad, n.inputs);
  }
}

void Graph::accumulate_param_grads(double scale) {
  for (auto& [id, p] : bound_) {
    if (!p->trainable) continue;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty()) continue;
    if (p->grad.empty()) p->grad = Array::zeros_like(p->value);
    kernels::axpy(p->grad.data(), n.grad.data(), scale, n.grad.size());
  }
}

}  // namespace s2st::ad

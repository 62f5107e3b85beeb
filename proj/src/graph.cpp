#include "snakesynth/graph.hpp"

#include <algorithm>
#include <string>

namespace snakesynth {

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw GraphError("variable " + std::to_string(v.id) + " is not recorded on this graph");
  }
  return nodes_[v.id];
}

template <typename T>
typename Graph<T>::Node& Graph<T>::node(Var v) {
  return const_cast<Node&>(std::as_const(*this).node(v));
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Graph<T>::input(Tensor<T> value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Graph<T>::parameter(Parameter<T>& p) {
  Node n;
  n.ref = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Graph<T>::frozen(const Parameter<T>& p) {
  Node n;
  n.ref = &p.value;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  return node(v).value();
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (!backward_done_) throw GraphError("gradients are only available after backward()");
  if (n.grad.empty()) n.grad = Tensor<T>(n.value().shape());
  return n.grad;
}

template <typename T>
bool Graph<T>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

template <typename T>
Var Graph<T>::record(Tensor<T> value, const std::vector<Var>& parents, BackwardFn fn) {
  if (backward_done_) throw GraphError("cannot record onto a graph after backward()");
  bool needs = false;
  for (Var p : parents) needs = needs || node(p).requires_grad;
  Node n;
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

template <typename T>
Tensor<T>& Graph<T>::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor<T>(n.value().shape());
  return n.grad;
}

template <typename T>
void Graph<T>::backward(Var loss) {
  if (nodes_.empty()) throw GraphError("backward() called before any forward pass was recorded");
  if (backward_done_) throw GraphError("backward() already ran on this graph");
  Node& root = node(loss);
  if (root.value().size() != 1) {
    throw GraphError("backward() needs a scalar loss, got shape " + shape_string(root.value().shape()));
  }
  grad_buffer(loss).fill(T(1));

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, Var{i});
  }
  backward_done_ = true;

  for (Node& n : nodes_) {
    if (n.param) n.param->zero_grad();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (!n.param || n.grad.empty()) continue;
    auto dst = n.param->grad.data();
    auto src = n.grad.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace snakesynth

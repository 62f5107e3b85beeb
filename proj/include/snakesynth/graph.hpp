#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "snakesynth/tensor.hpp"

namespace snakesynth {

/// Handle to a node recorded on a Graph.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t id = kInvalid;
  bool valid() const { return id != kInvalid; }
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Tape of forward operations. Nodes are appended in execution order, so
/// reverse insertion order is a valid reverse topological order.
///
/// A graph is single-use: record a forward pass, call backward() once, read
/// the gradients, then discard it.
template <typename T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  /// Leaf without gradient.
  Var constant(Tensor<T> value);
  /// Leaf that collects a gradient (used for input-gradient checks).
  Var input(Tensor<T> value);
  /// Trainable leaf. Its gradient is written to `p.grad` by backward().
  Var parameter(Parameter<T>& p);
  /// Uses the parameter's value without tracking a gradient for it.
  Var frozen(const Parameter<T>& p);

  const Tensor<T>& value(Var v) const;
  /// Gradient of the loss with respect to `v`; zeros if `v` was unreachable.
  const Tensor<T>& grad(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Propagates d(loss)/d(node) through every recorded node and stores the
  /// result on all registered parameters (overwriting previous gradients).
  void backward(Var loss);

  /// Records an op output. `fn` is only kept when some parent requires a gradient.
  Var record(Tensor<T> value, const std::vector<Var>& parents, BackwardFn fn);
  /// Gradient accumulator for `v`, zero-allocated on first use.
  Tensor<T>& grad_buffer(Var v);

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* ref = nullptr;
    mutable Tensor<T> grad;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;

    const Tensor<T>& value() const { return ref ? *ref : owned; }
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace snakesynth

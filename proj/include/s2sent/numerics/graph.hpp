#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent {

using NodeId = std::size_t;
using Gradients = std::map<NodeId, Tensor>;

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  NodeId id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

class BackwardContext;
using BackwardFn = std::function<void(BackwardContext&)>;

/// Reverse-mode tape. Nodes are appended in evaluation order, so the node
/// vector is already a topological order.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value) { return add_leaf(std::move(value), false, false); }

  /// Trainable leaf; backward() reports its gradient.
  Var parameter(Tensor value) { return add_leaf(std::move(value), true, true); }

  /// Non-trainable leaf whose gradient is still reported (inputs under study).
  Var variable(Tensor value) { return add_leaf(std::move(value), false, true); }

  /// Leaves that refer to a tensor owned elsewhere instead of copying it.
  /// The referenced tensor must outlive the graph and stay unmodified.
  Var constant_ref(const Tensor& value) { return add_ref(value, false); }
  Var parameter_ref(const Tensor& value) { return add_ref(value, true); }

  Var record(const char* tag, std::vector<NodeId> inputs, Tensor value, BackwardFn backward) {
    bool needs = false;
    for (NodeId in : inputs) {
      if (in >= nodes_.size()) throw ContractError("graph input refers to a future node");
      needs = needs || nodes_[in].requires_grad;
    }
    Node node;
    node.tag = tag;
    node.inputs = std::move(inputs);
    node.value = std::move(value);
    node.requires_grad = needs;
    if (needs) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
  }

  const Tensor& value(NodeId id) const { return nodes_.at(id).get(); }
  const char* tag(NodeId id) const { return nodes_.at(id).tag; }
  const std::vector<NodeId>& inputs(NodeId id) const { return nodes_.at(id).inputs; }
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  bool is_trainable(NodeId id) const { return nodes_.at(id).trainable; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradients of the scalar `loss` with respect to every parameter and
  /// every flagged variable. Unreached leaves get zero gradients.
  Gradients backward(Var loss);

 private:
  friend class BackwardContext;

  struct Node {
    const char* tag = "leaf";
    std::vector<NodeId> inputs;
    Tensor value;
    const Tensor* external = nullptr;
    bool requires_grad = false;
    bool trainable = false;
    bool collect = false;
    BackwardFn backward;

    const Tensor& get() const { return external ? *external : value; }
  };

  Var add_ref(const Tensor& value, bool trainable) {
    Node node;
    node.external = &value;
    node.requires_grad = trainable;
    node.trainable = trainable;
    node.collect = trainable;
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
  }

  Var add_leaf(Tensor value, bool trainable, bool collect) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = collect;
    node.trainable = trainable;
    node.collect = collect;
    nodes_.push_back(std::move(node));
    return Var{this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return graph->value(id); }

class BackwardContext {
 public:
  BackwardContext(Graph& graph, NodeId node, std::vector<Tensor>& grads)
      : graph_(graph), node_(node), grads_(grads) {}

  const Tensor& grad_output() const { return grads_[node_]; }
  const Tensor& output() const { return graph_.nodes_[node_].get(); }
  const Tensor& input(std::size_t i) const { return graph_.nodes_[input_id(i)].get(); }
  bool needs(std::size_t i) const { return graph_.nodes_[input_id(i)].requires_grad; }

  /// Accumulator for input i, zero-initialized on first use.
  Tensor& grad(std::size_t i) {
    const NodeId id = input_id(i);
    Tensor& g = grads_[id];
    if (g.empty()) g = Tensor(graph_.nodes_[id].get().shape());
    return g;
  }

 private:
  NodeId input_id(std::size_t i) const { return graph_.nodes_[node_].inputs.at(i); }

  Graph& graph_;
  NodeId node_;
  std::vector<Tensor>& grads_;
};

inline Gradients Graph::backward(Var loss) {
  if (loss.graph != this) throw ContractError("backward: loss belongs to another graph");
  const Tensor& out = nodes_.at(loss.id).get();
  if (out.size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + shape_string(out.shape()));
  }
  std::vector<Tensor> grads(nodes_.size());
  grads[loss.id] = Tensor(out.shape(), 1.0);
  for (NodeId id = loss.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || !node.backward || grads[id].empty()) continue;
    BackwardContext ctx(*this, id, grads);
    node.backward(ctx);
    if (!node.collect) grads[id] = Tensor();
  }
  Gradients result;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (!nodes_[id].collect) continue;
    if (grads[id].empty()) {
      result.emplace(id, Tensor(nodes_[id].get().shape()));
    } else {
      result.emplace(id, std::move(grads[id]));
    }
  }
  return result;
}

}  // namespace s2sent

#pragma once

#include <string>
#include <vector>

#include "s2sent/numerics/graph.hpp"
#include "s2sent/numerics/tensor.hpp"

namespace s2sent {

/// Ordered, named collection of trainable tensors. The order is part of the
/// checkpoint format.
class ParameterList {
 public:
  std::size_t add(std::string name, Tensor value) {
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return values_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  Tensor& operator[](std::size_t i) { return values_[i]; }
  const Tensor& operator[](std::size_t i) const { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::vector<Tensor>& tensors() { return values_; }
  const std::vector<Tensor>& tensors() const { return values_; }

  std::size_t scalar_count() const {
    std::size_t total = 0;
    for (const Tensor& t : values_) total += t.size();
    return total;
  }

  /// Leaves referring to these tensors; trainable leaves report gradients.
  std::vector<Var> bind(Graph& graph, bool trainable) const {
    std::vector<Var> vars;
    vars.reserve(values_.size());
    for (const Tensor& t : values_) {
      vars.push_back(trainable ? graph.parameter_ref(t) : graph.constant_ref(t));
    }
    return vars;
  }

  friend bool operator==(const ParameterList&, const ParameterList&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

}  // namespace s2sent

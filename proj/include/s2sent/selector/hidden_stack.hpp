#pragma once

#include <span>
#include <vector>

#include "s2sent/numerics/tensor.hpp"

namespace s2sent {

/// The per-block hidden states u^(0..N-1), each [L x D], stacked along a
/// leading block axis into one [N x L x D] tensor.
class HiddenStack {
 public:
  std::size_t blocks() const { return stacked_.dim(0); }
  std::size_t tokens() const { return stacked_.dim(1); }
  std::size_t features() const { return stacked_.dim(2); }

  const Tensor& tensor() const { return stacked_; }
  double operator()(std::size_t n, std::size_t l, std::size_t d) const { return stacked_(n, l, d); }

  /// Block n as an [L x D] matrix.
  Tensor block(std::size_t n) const {
    const std::size_t width = tokens() * features();
    std::vector<double> values(stacked_.data().begin() + static_cast<std::ptrdiff_t>(n * width),
                               stacked_.data().begin() + static_cast<std::ptrdiff_t>((n + 1) * width));
    return Tensor({tokens(), features()}, std::move(values));
  }

  friend HiddenStack stack_blocks(std::span<const Tensor> blocks);

 private:
  explicit HiddenStack(Tensor stacked) : stacked_(std::move(stacked)) {}
  Tensor stacked_;
};

inline HiddenStack stack_blocks(std::span<const Tensor> blocks) {
  require(!blocks.empty(), "stack_blocks: at least one block is required");
  const Shape& first = blocks.front().shape();
  if (first.size() != 2) {
    throw DimensionError("stack_blocks: blocks must be [L x D], got " + shape_string(first));
  }
  std::vector<double> values;
  values.reserve(blocks.size() * blocks.front().size());
  for (std::size_t n = 0; n < blocks.size(); ++n) {
    if (blocks[n].shape() != first) {
      throw DimensionError("stack_blocks: block " + std::to_string(n) + " has shape " +
                           shape_string(blocks[n].shape()) + ", expected " + shape_string(first));
    }
    values.insert(values.end(), blocks[n].data().begin(), blocks[n].data().end());
  }
  return HiddenStack(Tensor({blocks.size(), first[0], first[1]}, std::move(values)));
}

}  // namespace s2sent

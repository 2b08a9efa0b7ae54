#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "s2sent/numerics/graph.hpp"
#include "s2sent/numerics/ops.hpp"
#include "s2sent/numerics/rng.hpp"
#include "s2sent/selector/hidden_stack.hpp"
#include "s2sent/spectral/dct.hpp"

namespace s2sent::selector {

/// Excitation weights: a shared reduction W1 [D x D/r] and one expansion
/// head W2^(n) [D/r x D] per block. No biases.
struct SelectorParams {
  Tensor w1;
  std::vector<Tensor> w2;
  std::size_t reduction = 1;
  Activation bottleneck = Activation::relu;

  std::size_t features() const { return w1.dim(0); }
  std::size_t hidden() const { return w1.dim(1); }
  std::size_t branches() const { return w2.size(); }
};

inline std::size_t selector_parameter_count(std::size_t features, std::size_t reduction,
                                            std::size_t branches) {
  const std::size_t hidden = features / reduction;
  return features * hidden + branches * hidden * features;
}

/// W1 and every W2^(n) drawn uniformly from +-1/sqrt(fan_in).
inline SelectorParams init_selector(std::size_t features, std::size_t reduction,
                                    std::size_t branches, SplitMix64& rng,
                                    Activation bottleneck = Activation::relu) {
  require(reduction >= 1 && features % reduction == 0,
          "init_selector: r=" + std::to_string(reduction) + " must divide D=" +
              std::to_string(features));
  require(branches >= 1, "init_selector: at least one branch");
  const std::size_t hidden = features / reduction;
  SelectorParams p;
  p.reduction = reduction;
  p.bottleneck = bottleneck;
  const double b1 = 1.0 / std::sqrt(static_cast<double>(features));
  p.w1 = uniform_tensor({features, hidden}, -b1, b1, rng);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (std::size_t n = 0; n < branches; ++n) p.w2.push_back(uniform_tensor({hidden, features}, -b2, b2, rng));
  return p;
}

/// SelectorParams bound into a graph.
struct SelectorVars {
  Var w1;
  std::vector<Var> w2;
  Activation bottleneck = Activation::relu;
};

inline SelectorVars bind_constants(Graph& g, const SelectorParams& p) {
  SelectorVars vars{g.constant(p.w1), {}, p.bottleneck};
  for (const Tensor& w : p.w2) vars.w2.push_back(g.constant(w));
  return vars;
}

inline SelectorVars bind_parameters(Graph& g, const SelectorParams& p) {
  SelectorVars vars{g.parameter(p.w1), {}, p.bottleneck};
  for (const Tensor& w : p.w2) vars.w2.push_back(g.parameter(w));
  return vars;
}

/// Gate vectors e^(n) = sigmoid(act(f W1) W2^(n)), each [D].
inline std::vector<Var> excite(Var f, const SelectorVars& p) {
  const std::size_t D = p.w1.value().dim(0);
  if (f.value().size() != D) {
    throw DimensionError("excite: squeezed features " + shape_string(f.shape()) +
                         " do not match W1 " + shape_string(p.w1.shape()));
  }
  for (const Var& w : p.w2) {
    if (w.value().dim(0) != p.w1.value().dim(1) || w.value().dim(1) != D) {
      throw DimensionError("excite: W2 head " + shape_string(w.shape()) + " incompatible with W1 " +
                           shape_string(p.w1.shape()));
    }
  }
  const Var surplus = ag::activation(ag::matmul(ag::reshape(f, {1, D}), p.w1), p.bottleneck);
  std::vector<Var> gates;
  gates.reserve(p.w2.size());
  for (const Var& w : p.w2) gates.push_back(ag::reshape(ag::sigmoid(ag::matmul(surplus, w)), {D}));
  return gates;
}

struct FusedVars {
  Var v;        ///< [L x D]
  Var weights;  ///< [N x D], softmax over blocks per feature
};

/// v[l][d] = sum_n softmax_n(e^(n)_d) u^(n)[l][d].
inline FusedVars select_fuse(const std::vector<Var>& gates, const std::vector<Var>& blocks) {
  if (gates.size() != blocks.size() || gates.empty()) {
    throw ContractError("select_fuse: " + std::to_string(gates.size()) + " gates for " +
                        std::to_string(blocks.size()) + " blocks");
  }
  const Var weights = ag::softmax(ag::stack_rows(gates), 0);
  Var v = ag::mul_row(blocks[0], ag::row(weights, 0));
  for (std::size_t n = 1; n < blocks.size(); ++n) {
    v = ag::add(v, ag::mul_row(blocks[n], ag::row(weights, n)));
  }
  return {v, weights};
}

/// Stack -> frequency squeeze -> excite -> select.
inline FusedVars ss_forward_2d(const std::vector<Var>& blocks, const SelectorVars& p,
                               const spectral::FrequencyPlan& plan) {
  if (blocks.size() != p.w2.size()) {
    throw ContractError("ss_forward_2d: " + std::to_string(blocks.size()) + " blocks but " +
                        std::to_string(p.w2.size()) + " excitation heads");
  }
  const Var f = spectral::fs_squeeze(blocks, plan);
  return select_fuse(excite(f, p), blocks);
}

/// Single-representation recalibration: squeeze over tokens with an N=1
/// plan, one sigmoid gate e in (0,1)^D, v = e * block.
inline Var ss_forward_1d(Var block, const SelectorVars& p, const spectral::FrequencyPlan& plan) {
  if (p.w2.size() != 1) throw ContractError("ss_forward_1d: needs exactly one excitation head");
  if (plan.n_blocks != 1) throw ContractError("ss_forward_1d: plan must be built for N=1");
  const Var f = spectral::fs_squeeze(std::vector<Var>{block}, plan);
  const Var gate = excite(f, p).front();
  return ag::mul_row(block, gate);
}

/// Traditional token-level self-gate: x + sigmoid(x w) * x, one scalar
/// relevance per token. Baseline for the redundancy comparison.
inline Var token_selfgate(Var block, Var projection) {
  const std::size_t L = block.value().dim(0);
  const Var relevance = ag::reshape(ag::sigmoid(ag::matmul(block, projection)), {L});
  return ag::add(block, ag::mul_col(block, relevance));
}

inline Var mean_of(const std::vector<Var>& blocks) {
  require(!blocks.empty(), "mean_of: no blocks");
  Var total = blocks[0];
  for (std::size_t n = 1; n < blocks.size(); ++n) total = ag::add(total, blocks[n]);
  if (blocks.size() == 1) return total;
  return ag::scale(total, 1.0 / static_cast<double>(blocks.size()));
}

// Plain-tensor entry points. Each evaluates the graph ops on constants.

inline std::vector<Tensor> excite(const Tensor& f, const SelectorParams& p) {
  Graph g;
  std::vector<Tensor> out;
  for (const Var& e : excite(g.constant(f), bind_constants(g, p))) out.push_back(e.value());
  return out;
}

struct FusedRepresentation {
  Tensor v;
  Tensor weights;
};

inline FusedRepresentation select_fuse(std::span<const Tensor> gates, std::span<const Tensor> blocks) {
  Graph g;
  std::vector<Var> gv, bv;
  for (const Tensor& e : gates) gv.push_back(g.constant(e));
  for (const Tensor& b : blocks) bv.push_back(g.constant(b));
  const FusedVars fused = select_fuse(gv, bv);
  return {fused.v.value(), fused.weights.value()};
}

inline FusedRepresentation ss_forward_2d(std::span<const Tensor> blocks, const SelectorParams& p,
                                         const spectral::FrequencyPlan& plan) {
  Graph g;
  std::vector<Var> bv;
  for (const Tensor& b : blocks) bv.push_back(g.constant(b));
  const FusedVars fused = ss_forward_2d(bv, bind_constants(g, p), plan);
  return {fused.v.value(), fused.weights.value()};
}

inline Tensor ss_forward_1d(const Tensor& block, const SelectorParams& p,
                            const spectral::FrequencyPlan& plan) {
  Graph g;
  return ss_forward_1d(g.constant(block), bind_constants(g, p), plan).value();
}

inline Tensor token_selfgate_baseline(const Tensor& block, const Tensor& projection) {
  Graph g;
  return token_selfgate(g.constant(block), g.constant(projection)).value();
}

struct ParameterAudit {
  std::size_t count = 0;
  double ratio = 0.0;
};

/// Added selector parameters D(D/r) + N(D/r)D and their share of a backbone.
inline ParameterAudit parameter_audit(std::size_t features, std::size_t reduction,
                                      std::size_t branches, std::size_t backbone_params) {
  require(reduction >= 1 && features % reduction == 0,
          "parameter_audit: r=" + std::to_string(reduction) + " does not divide D=" +
              std::to_string(features));
  require(backbone_params > 0, "parameter_audit: backbone size must be positive");
  const std::size_t count = selector_parameter_count(features, reduction, branches);
  return {count, static_cast<double>(count) / static_cast<double>(backbone_params)};
}

enum class FlowFusion { average, spatial_selection };

struct BlockFlow {
  double direct_weight = 0.0;  ///< mean over d of the fusion weight of this block
  double gradient_norm = 0.0;  ///< ||d sum(v) / d u^(n)||
  Tensor gradient;
};

struct GradientFlowReport {
  std::vector<BlockFlow> blocks;

  /// Population coefficient of variation of the per-block gradient norms.
  double norm_variation() const {
    double mean = 0.0;
    for (const auto& b : blocks) mean += b.gradient_norm;
    mean /= static_cast<double>(blocks.size());
    double var = 0.0;
    for (const auto& b : blocks) var += (b.gradient_norm - mean) * (b.gradient_norm - mean);
    var /= static_cast<double>(blocks.size());
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  }
};

/// Gradient of sum(v) with respect to each block under plain averaging or
/// spatial selection. The full gradient carries both the direct path
/// (weight w[n][d]) and the path through the excitation gates.
inline GradientFlowReport gradient_flow_diagnostic(std::span<const Tensor> blocks,
                                                   const SelectorParams& p,
                                                   const spectral::FrequencyPlan& plan,
                                                   FlowFusion fusion) {
  require(!blocks.empty(), "gradient_flow_diagnostic: no blocks");
  Graph g;
  std::vector<Var> bv;
  for (const Tensor& b : blocks) bv.push_back(g.variable(b));
  const std::size_t N = blocks.size(), D = blocks.front().dim(1);
  Var v;
  Tensor weights({N, D}, 1.0 / static_cast<double>(N));
  if (fusion == FlowFusion::average) {
    v = mean_of(bv);
  } else {
    const FusedVars fused = ss_forward_2d(bv, bind_constants(g, p), plan);
    v = fused.v;
    weights = fused.weights.value();
  }
  const Gradients grads = g.backward(ag::sum(v));
  GradientFlowReport report;
  for (std::size_t n = 0; n < N; ++n) {
    BlockFlow flow;
    double w = 0.0;
    for (std::size_t d = 0; d < D; ++d) w += weights(n, d);
    flow.direct_weight = w / static_cast<double>(D);
    flow.gradient = grads.at(bv[n].id);
    flow.gradient_norm = frobenius_norm(flow.gradient);
    report.blocks.push_back(std::move(flow));
  }
  return report;
}

}  // namespace s2sent::selector

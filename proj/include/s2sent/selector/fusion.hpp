#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2sent/numerics/parameters.hpp"
#include "s2sent/selector/selector.hpp"

namespace s2sent::selector {

/// How the last-k block outputs become one [L x D] representation.
///   avg         mean of the blocks
///   ss1d        mean of the blocks, then single-gate recalibration
///   ss2d        spatial selection over the stacked blocks
///   token_gate  mean of the blocks, then the token-level self-gate
enum class Variant { avg, ss1d, ss2d, token_gate };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::avg: return "avg";
    case Variant::ss1d: return "1d";
    case Variant::ss2d: return "2d";
    case Variant::token_gate: return "token_gate";
  }
  return "?";
}

inline Variant parse_variant(std::string_view name) {
  if (name == "avg") return Variant::avg;
  if (name == "1d") return Variant::ss1d;
  if (name == "2d") return Variant::ss2d;
  if (name == "token_gate") return Variant::token_gate;
  throw ContractError("unknown variant '" + std::string(name) + "' (expected avg|1d|2d|token_gate)");
}

struct FusionConfig {
  Variant variant = Variant::ss2d;
  std::size_t n_blocks = 3;
  std::size_t freqs = 4;
  std::size_t reduction = 16;
  Activation bottleneck = Activation::relu;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

/// Indices of the fusion head's tensors in a ParameterList.
struct FusionLayout {
  std::size_t w1 = 0;
  std::vector<std::size_t> w2;
  std::size_t gate = 0;
};

inline FusionLayout add_fusion_parameters(ParameterList& params, const FusionConfig& cfg,
                                          std::size_t features, SplitMix64& rng) {
  require(cfg.n_blocks >= 1, "fusion: n_blocks must be at least 1");
  require(cfg.freqs >= 1, "fusion: freqs must be at least 1");
  FusionLayout layout;
  switch (cfg.variant) {
    case Variant::avg: break;
    case Variant::ss1d:
    case Variant::ss2d: {
      require(features % cfg.freqs == 0,
              "fusion: D=" + std::to_string(features) + " is not divisible by m=" +
                  std::to_string(cfg.freqs));
      const std::size_t branches = cfg.variant == Variant::ss2d ? cfg.n_blocks : 1;
      SelectorParams p = init_selector(features, cfg.reduction, branches, rng, cfg.bottleneck);
      layout.w1 = params.add("selector.w1", std::move(p.w1));
      for (std::size_t n = 0; n < branches; ++n) {
        layout.w2.push_back(params.add("selector.w2." + std::to_string(n), std::move(p.w2[n])));
      }
      break;
    }
    case Variant::token_gate: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(features));
      layout.gate = params.add("token_gate.w", uniform_tensor({features, 1}, -bound, bound, rng));
      break;
    }
  }
  return layout;
}

/// Selector parameter count for a given head (0 for averaging).
inline std::size_t fusion_parameter_count(const FusionConfig& cfg, std::size_t features) {
  switch (cfg.variant) {
    case Variant::avg: return 0;
    case Variant::ss1d: return selector_parameter_count(features, cfg.reduction, 1);
    case Variant::ss2d: return selector_parameter_count(features, cfg.reduction, cfg.n_blocks);
    case Variant::token_gate: return features;
  }
  return 0;
}

/// Fuses the last cfg.n_blocks entries of `block_outputs` (depth order).
inline Var fuse(const std::vector<Var>& block_outputs, std::span<const Var> params,
                const FusionLayout& layout, const FusionConfig& cfg) {
  if (cfg.n_blocks > block_outputs.size()) {
    throw ContractError("fusion: Last" + std::to_string(cfg.n_blocks) + " requested from " +
                        std::to_string(block_outputs.size()) + " blocks");
  }
  const std::vector<Var> last(block_outputs.end() - static_cast<std::ptrdiff_t>(cfg.n_blocks),
                              block_outputs.end());
  const std::size_t L = last.front().value().dim(0);
  auto selector_vars = [&] {
    SelectorVars vars{params[layout.w1], {}, cfg.bottleneck};
    for (std::size_t idx : layout.w2) vars.w2.push_back(params[idx]);
    return vars;
  };
  switch (cfg.variant) {
    case Variant::avg: return mean_of(last);
    case Variant::ss1d:
      return ss_forward_1d(mean_of(last), selector_vars(), spectral::plan_for_grid(1, L, cfg.freqs));
    case Variant::ss2d:
      return ss_forward_2d(last, selector_vars(), spectral::plan_for_grid(last.size(), L, cfg.freqs)).v;
    case Variant::token_gate: return token_selfgate(mean_of(last), params[layout.gate]);
  }
  return mean_of(last);
}

}  // namespace s2sent::selector

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "s2sent/numerics/graph.hpp"
#include "s2sent/numerics/tensor.hpp"
#include "s2sent/selector/hidden_stack.hpp"

namespace s2sent::spectral {

/// One separable 2D cosine pattern over the block x token grid, without the
/// DCT normalization constants:
///   values[n][l] = cos(pi a (n + 1/2) / N) * cos(pi b (l + 1/2) / L).
struct DctBasis {
  std::size_t n_blocks = 0;
  std::size_t seq_len = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  Tensor values;
};

inline DctBasis compute_basis(std::size_t n_blocks, std::size_t seq_len, std::size_t a,
                              std::size_t b) {
  require(n_blocks >= 1 && seq_len >= 1, "make_basis: grid must be at least 1x1");
  if (a >= n_blocks || b >= seq_len) {
    throw ContractError("make_basis: frequency (" + std::to_string(a) + "," + std::to_string(b) +
                        ") outside " + std::to_string(n_blocks) + "x" + std::to_string(seq_len) +
                        " grid");
  }
  constexpr double pi = std::numbers::pi;
  Tensor values({n_blocks, seq_len});
  for (std::size_t n = 0; n < n_blocks; ++n) {
    const double row = std::cos(pi * static_cast<double>(a) * (static_cast<double>(n) + 0.5) /
                                static_cast<double>(n_blocks));
    for (std::size_t l = 0; l < seq_len; ++l) {
      const double col = std::cos(pi * static_cast<double>(b) * (static_cast<double>(l) + 0.5) /
                                  static_cast<double>(seq_len));
      values(n, l) = row * col;
    }
  }
  return DctBasis{n_blocks, seq_len, a, b, std::move(values)};
}

/// Process-wide basis cache keyed by (N, L, a, b). References stay valid for
/// the life of the process; concurrent lookups take a shared lock.
class BasisCache {
 public:
  const DctBasis& get(std::size_t n_blocks, std::size_t seq_len, std::size_t a, std::size_t b) {
    const Key key{n_blocks, seq_len, a, b};
    {
      std::shared_lock lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    DctBasis basis = compute_basis(n_blocks, seq_len, a, b);
    std::unique_lock lock(mutex_);
    return entries_.try_emplace(key, std::move(basis)).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  static BasisCache& global() {
    static BasisCache cache;
    return cache;
  }

 private:
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  mutable std::shared_mutex mutex_;
  std::map<Key, DctBasis> entries_;
};

inline const DctBasis& make_basis(std::size_t n_blocks, std::size_t seq_len, std::size_t a,
                                  std::size_t b) {
  return BasisCache::global().get(n_blocks, seq_len, a, b);
}

/// Number of cached bases (diagnostic counter).
inline std::size_t basis_cache_size() { return BasisCache::global().size(); }

struct FrequencyPair {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const FrequencyPair&, const FrequencyPair&) = default;
};

/// Feature part k is squeezed with pairs[min(k, pairs.size() - 1)]. pairs is
/// shorter than parts only for grids with fewer than `parts` cells.
struct FrequencyPlan {
  std::size_t n_blocks = 0;
  std::size_t seq_len = 0;
  std::size_t parts = 0;
  std::vector<FrequencyPair> pairs;

  bool clamped() const { return pairs.size() < parts; }
  const FrequencyPair& pair_for_part(std::size_t k) const {
    return pairs[std::min(k, pairs.size() - 1)];
  }
  friend bool operator==(const FrequencyPlan&, const FrequencyPlan&) = default;
};

namespace detail {

inline std::vector<FrequencyPair> ordered_grid(std::size_t n_blocks, std::size_t seq_len) {
  std::vector<FrequencyPair> grid;
  grid.reserve(n_blocks * seq_len);
  for (std::size_t a = 0; a < n_blocks; ++a)
    for (std::size_t b = 0; b < seq_len; ++b) grid.push_back({a, b});
  // Lowest total frequency first; within a diagonal the sequence-axis
  // frequency b comes first.
  std::sort(grid.begin(), grid.end(), [](const FrequencyPair& x, const FrequencyPair& y) {
    const std::size_t sx = x.a + x.b, sy = y.a + y.b;
    if (sx != sy) return sx < sy;
    return x.a < y.a;
  });
  return grid;
}

}  // namespace detail

/// The m lowest-frequency pairs of the N x L grid.
inline FrequencyPlan select_low_frequencies(std::size_t n_blocks, std::size_t seq_len,
                                            std::size_t m) {
  require(n_blocks >= 1 && seq_len >= 1, "select_low_frequencies: empty grid");
  require(m >= 1, "select_low_frequencies: m must be at least 1");
  if (m > n_blocks * seq_len) {
    throw ContractError("select_low_frequencies: m=" + std::to_string(m) + " exceeds the " +
                        std::to_string(n_blocks * seq_len) + " pairs of a " +
                        std::to_string(n_blocks) + "x" + std::to_string(seq_len) + " grid");
  }
  auto grid = detail::ordered_grid(n_blocks, seq_len);
  grid.resize(m);
  return FrequencyPlan{n_blocks, seq_len, m, std::move(grid)};
}

/// Like select_low_frequencies, but a grid smaller than m yields all of its
/// pairs and the trailing parts reuse the last one.
inline FrequencyPlan plan_for_grid(std::size_t n_blocks, std::size_t seq_len, std::size_t m) {
  require(m >= 1, "plan_for_grid: m must be at least 1");
  const std::size_t available = n_blocks * seq_len;
  if (m <= available) return select_low_frequencies(n_blocks, seq_len, m);
  FrequencyPlan plan = select_low_frequencies(n_blocks, seq_len, available);
  plan.parts = m;
  return plan;
}

namespace detail {

inline void check_plan(const FrequencyPlan& plan, std::size_t n_blocks, std::size_t seq_len,
                       std::size_t features) {
  require(plan.parts >= 1 && !plan.pairs.empty(), "fs_squeeze: empty frequency plan");
  if (plan.n_blocks != n_blocks || plan.seq_len != seq_len) {
    throw ContractError("fs_squeeze: plan built for " + std::to_string(plan.n_blocks) + "x" +
                        std::to_string(plan.seq_len) + " but input is " +
                        std::to_string(n_blocks) + "x" + std::to_string(seq_len));
  }
  if (features % plan.parts != 0) {
    throw ContractError("fs_squeeze: D=" + std::to_string(features) +
                        " is not divisible by m=" + std::to_string(plan.parts));
  }
}

}  // namespace detail

/// Multi-spectral squeeze: feature part k (width D/m) is projected onto its
/// basis over all (n, l) positions; parts are concatenated in order.
inline Tensor fs_squeeze(const HiddenStack& stack, const FrequencyPlan& plan) {
  const std::size_t N = stack.blocks(), L = stack.tokens(), D = stack.features();
  detail::check_plan(plan, N, L, D);
  const std::size_t width = D / plan.parts;
  Tensor f({D});
  for (std::size_t k = 0; k < plan.parts; ++k) {
    const FrequencyPair& p = plan.pair_for_part(k);
    const Tensor& alpha = make_basis(N, L, p.a, p.b).values;
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t l = 0; l < L; ++l) {
        const double w = alpha(n, l);
        for (std::size_t d = k * width; d < (k + 1) * width; ++d) f[d] += stack(n, l, d) * w;
      }
    }
  }
  return f;
}

/// Differentiable fs_squeeze over blocks held as separate graph nodes.
inline Var fs_squeeze(const std::vector<Var>& blocks, const FrequencyPlan& plan) {
  require(!blocks.empty(), "fs_squeeze: no blocks");
  const Shape& shape = blocks.front().shape();
  if (shape.size() != 2) throw DimensionError("fs_squeeze: blocks must be [L x D]");
  const std::size_t N = blocks.size(), L = shape[0], D = shape[1];
  detail::check_plan(plan, N, L, D);
  const std::size_t width = D / plan.parts;
  std::vector<const Tensor*> bases(plan.parts);
  for (std::size_t k = 0; k < plan.parts; ++k) {
    const FrequencyPair& p = plan.pair_for_part(k);
    bases[k] = &make_basis(N, L, p.a, p.b).values;
  }
  std::vector<NodeId> ids;
  Tensor f({D});
  for (std::size_t n = 0; n < N; ++n) {
    const Tensor& u = blocks[n].value();
    if (u.shape() != shape) {
      throw DimensionError("fs_squeeze: block " + std::to_string(n) + " has shape " +
                           shape_string(u.shape()) + ", expected " + shape_string(shape));
    }
    ids.push_back(blocks[n].id);
    for (std::size_t k = 0; k < plan.parts; ++k) {
      const Tensor& alpha = *bases[k];
      for (std::size_t l = 0; l < L; ++l) {
        const double w = alpha(n, l);
        for (std::size_t d = k * width; d < (k + 1) * width; ++d) f[d] += u(l, d) * w;
      }
    }
  }
  return blocks.front().graph->record(
      "fs_squeeze", std::move(ids), std::move(f),
      [N, L, width, bases = std::move(bases)](BackwardContext& ctx) {
        const Tensor& g = ctx.grad_output();
        for (std::size_t n = 0; n < N; ++n) {
          if (!ctx.needs(n)) continue;
          Tensor& gu = ctx.grad(n);
          for (std::size_t k = 0; k < bases.size(); ++k) {
            const Tensor& alpha = *bases[k];
            for (std::size_t l = 0; l < L; ++l) {
              const double w = alpha(n, l);
              for (std::size_t d = k * width; d < (k + 1) * width; ++d) gu(l, d) += g[d] * w;
            }
          }
        }
      });
}

/// Global average pooling over the block and token axes.
inline Tensor gap_squeeze(const HiddenStack& stack) {
  const std::size_t N = stack.blocks(), L = stack.tokens(), D = stack.features();
  Tensor f({D});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t d = 0; d < D; ++d) f[d] += stack(n, l, d);
  const double inv = 1.0 / static_cast<double>(N * L);
  for (double& v : f.data()) v *= inv;
  return f;
}

namespace detail {

/// Orthonormal DCT-II matrix C with C[k][i] = c_k cos(pi k (i + 1/2) / n).
inline Tensor orthonormal_dct_matrix(std::size_t n) {
  constexpr double pi = std::numbers::pi;
  Tensor c({n, n});
  for (std::size_t k = 0; k < n; ++k) {
    const double norm = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      c(k, i) = norm * std::cos(pi * static_cast<double>(k) * (static_cast<double>(i) + 0.5) /
                                static_cast<double>(n));
    }
  }
  return c;
}

}  // namespace detail

/// Orthonormal 2D DCT-II coefficients of X [N x L].
inline Tensor dct2_orthonormal(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("dct2_orthonormal expects a matrix");
  const std::size_t N = x.dim(0), L = x.dim(1);
  const Tensor cn = detail::orthonormal_dct_matrix(N);
  const Tensor cl = detail::orthonormal_dct_matrix(L);
  Tensor coeff({N, L});
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < L; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < L; ++j) s += cn(a, i) * cl(b, j) * x(i, j);
      coeff(a, b) = s;
    }
  return coeff;
}

/// Inverse (orthonormal DCT-III) of dct2_orthonormal.
inline Tensor idct2_orthonormal(const Tensor& coeff) {
  if (coeff.rank() != 2) throw DimensionError("idct2_orthonormal expects a matrix");
  const std::size_t N = coeff.dim(0), L = coeff.dim(1);
  const Tensor cn = detail::orthonormal_dct_matrix(N);
  const Tensor cl = detail::orthonormal_dct_matrix(L);
  Tensor x({N, L});
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      double s = 0.0;
      for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < L; ++b) s += cn(a, i) * cl(b, j) * coeff(a, b);
      x(i, j) = s;
    }
  return x;
}

/// Forward then inverse orthonormal 2D DCT; returns the reconstruction.
inline Tensor dct_roundtrip_oracle(const Tensor& x) { return idct2_orthonormal(dct2_orthonormal(x)); }

}  // namespace s2sent::spectral

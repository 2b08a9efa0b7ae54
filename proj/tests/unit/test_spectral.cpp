#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "s2sent/numerics/gradcheck.hpp"
#include "s2sent/numerics/ops.hpp"
#include "s2sent/numerics/rng.hpp"
#include "s2sent/selector/hidden_stack.hpp"
#include "s2sent/spectral/dct.hpp"

using namespace s2sent;
using spectral::FrequencyPair;

namespace {

std::vector<Tensor> random_blocks(std::size_t n, std::size_t l, std::size_t d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(uniform_tensor({l, d}, -2.0, 2.0, rng));
  return out;
}

std::vector<Tensor> constant_blocks(std::size_t n, std::size_t l, std::size_t d, double c) {
  return std::vector<Tensor>(n, Tensor({l, d}, c));
}

}  // namespace

TEST(MakeBasis, ZeroFrequencyIsAllOnes) {
  EXPECT_EQ(spectral::make_basis(2, 2, 0, 0).values, Tensor::matrix({{1, 1}, {1, 1}}));
}

TEST(MakeBasis, SequenceAxisCosine) {
  const Tensor& v = spectral::make_basis(1, 2, 0, 1).values;
  EXPECT_NEAR(v(0, 0), 0.70710678118654757, 1e-15);
  EXPECT_NEAR(v(0, 1), -0.70710678118654746, 1e-15);
}

TEST(MakeBasis, BlockAxisCosine) {
  const Tensor& v = spectral::make_basis(2, 1, 1, 0).values;
  EXPECT_NEAR(v(0, 0), std::cos(std::numbers::pi / 4), 1e-15);
  EXPECT_NEAR(v(1, 0), std::cos(3 * std::numbers::pi / 4), 1e-15);
}

TEST(MakeBasis, OutOfRangeFrequencyIsRejected) {
  EXPECT_THROW(spectral::make_basis(2, 3, 2, 0), ContractError);
  EXPECT_THROW(spectral::make_basis(2, 3, 0, 3), ContractError);
  EXPECT_THROW(spectral::make_basis(0, 3, 0, 0), ContractError);
}

TEST(MakeBasis, CachedPerKey) {
  const std::size_t before = spectral::basis_cache_size();
  const auto& first = spectral::make_basis(7, 11, 3, 5);
  const auto& again = spectral::make_basis(7, 11, 3, 5);
  EXPECT_EQ(&first, &again);
  EXPECT_EQ(spectral::basis_cache_size(), before + 1);
}

TEST(SelectLowFrequencies, GapOnly) {
  const auto plan = spectral::select_low_frequencies(3, 4, 1);
  EXPECT_EQ(plan.pairs, (std::vector<FrequencyPair>{{0, 0}}));
}

TEST(SelectLowFrequencies, FourPairsOnThreeByFourGrid) {
  const auto plan = spectral::select_low_frequencies(3, 4, 4);
  EXPECT_EQ(plan.pairs, (std::vector<FrequencyPair>{{0, 0}, {0, 1}, {1, 0}, {0, 2}}));
}

TEST(SelectLowFrequencies, SingleBlockVariesOnlyB) {
  const auto plan = spectral::select_low_frequencies(1, 8, 2);
  EXPECT_EQ(plan.pairs, (std::vector<FrequencyPair>{{0, 0}, {0, 1}}));
}

TEST(SelectLowFrequencies, TooManyPartsIsRejected) {
  EXPECT_THROW(spectral::select_low_frequencies(2, 2, 5), ContractError);
  EXPECT_THROW(spectral::select_low_frequencies(2, 2, 0), ContractError);
}

TEST(SelectLowFrequencies, PairsDistinctAscendingAndPure) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t l = 1; l <= 9; ++l) {
      const auto plan = spectral::select_low_frequencies(n, l, n * l);
      EXPECT_EQ(plan.pairs.front(), (FrequencyPair{0, 0}));
      for (std::size_t i = 1; i < plan.pairs.size(); ++i) {
        const auto& p = plan.pairs[i - 1];
        const auto& q = plan.pairs[i];
        EXPECT_LE(p.a + p.b, q.a + q.b);
        if (p.a + p.b == q.a + q.b) {
          EXPECT_LT(p.a, q.a);
        }
        for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(plan.pairs[j] == q);
      }
      EXPECT_EQ(plan, spectral::select_low_frequencies(n, l, n * l));
    }
}

TEST(PlanForGrid, ShortGridReusesLastPair) {
  const auto plan = spectral::plan_for_grid(1, 2, 4);
  EXPECT_TRUE(plan.clamped());
  EXPECT_EQ(plan.pairs.size(), 2u);
  EXPECT_EQ(plan.pair_for_part(3), (FrequencyPair{0, 1}));
  EXPECT_FALSE(spectral::plan_for_grid(2, 3, 4).clamped());
}

TEST(FsSqueeze, ConstantInputWithGap) {
  const auto blocks = constant_blocks(2, 3, 2, 1.0);
  const Tensor f = spectral::fs_squeeze(stack_blocks(blocks), spectral::select_low_frequencies(2, 3, 1));
  EXPECT_EQ(f, Tensor::vector({6.0, 6.0}));
}

TEST(FsSqueeze, ConstantInputHasNoEnergyAtNonzeroFrequency) {
  const auto blocks = constant_blocks(2, 3, 2, 1.0);
  const Tensor f = spectral::fs_squeeze(stack_blocks(blocks), spectral::select_low_frequencies(2, 3, 2));
  EXPECT_NEAR(f[0], 6.0, 1e-12);
  EXPECT_NEAR(f[1], 0.0, 1e-12);
}

TEST(FsSqueeze, MatchesDirectDoubleSum) {
  const auto blocks = random_blocks(2, 2, 4, 5);
  const auto plan = spectral::select_low_frequencies(2, 2, 4);
  const Tensor f = spectral::fs_squeeze(stack_blocks(blocks), plan);
  for (std::size_t d = 0; d < 4; ++d) {
    const auto [a, b] = plan.pairs[d];
    double expect = 0.0;
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t l = 0; l < 2; ++l) {
        expect += blocks[n](l, d) * std::cos(std::numbers::pi * a * (n + 0.5) / 2) *
                  std::cos(std::numbers::pi * b * (l + 0.5) / 2);
      }
    EXPECT_NEAR(f[d], expect, 1e-12);
  }
}

TEST(FsSqueeze, ContractViolations) {
  const auto blocks = random_blocks(2, 3, 6, 1);
  EXPECT_THROW(spectral::fs_squeeze(stack_blocks(blocks), spectral::select_low_frequencies(2, 3, 4)), ContractError);
  EXPECT_THROW(spectral::fs_squeeze(stack_blocks(blocks), spectral::select_low_frequencies(3, 3, 2)), ContractError);
}

TEST(FsSqueeze, GraphVersionMatchesTensorVersionAndGradients) {
  const auto blocks = random_blocks(3, 4, 8, 9);
  const auto plan = spectral::select_low_frequencies(3, 4, 4);
  Graph g;
  std::vector<Var> vars;
  for (const auto& b : blocks) vars.push_back(g.variable(b));
  const Var f = spectral::fs_squeeze(vars, plan);
  EXPECT_LT(max_abs_diff(f.value(), spectral::fs_squeeze(stack_blocks(blocks), plan)), 1e-12);
  // Linear map: d sum(w * f) / d U[n][l][d] = w[d] * alpha(n, l).
  SplitMix64 rng(2);
  const Tensor w = uniform_tensor({8}, -1.0, 1.0, rng);
  const Gradients grads = g.backward(ag::sum(ag::mul_const(f, w)));
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t l = 0; l < 4; ++l)
      for (std::size_t d = 0; d < 8; ++d) {
        const auto& p = plan.pair_for_part(d / 2);
        EXPECT_NEAR(grads.at(vars[n].id)(l, d), w[d] * spectral::make_basis(3, 4, p.a, p.b).values(n, l), 1e-12);
      }
}

TEST(GapSqueeze, Examples) {
  EXPECT_EQ(spectral::gap_squeeze(stack_blocks(constant_blocks(2, 3, 4, 1.0))), Tensor({4}, 1.0));
  const std::vector<Tensor> blocks = {Tensor::matrix({{1}, {2}}), Tensor::matrix({{3}, {4}})};
  EXPECT_DOUBLE_EQ(spectral::gap_squeeze(stack_blocks(blocks))[0], 2.5);
}

// Properties over random stacks.

TEST(SpectralProperties, GapEquivalence) {
  SplitMix64 rng(77);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(4), l = 1 + rng.below(16), d = 1 + rng.below(32);
    const auto blocks = random_blocks(n, l, d, rng());
    const auto stack = stack_blocks(blocks);
    const Tensor fs = spectral::fs_squeeze(stack, spectral::select_low_frequencies(n, l, 1));
    const Tensor gap = spectral::gap_squeeze(stack);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(fs[i], static_cast<double>(n * l) * gap[i], 1e-10);
  }
}

TEST(SpectralProperties, Linearity) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto u1 = random_blocks(3, 5, 8, seed);
    const auto u2 = random_blocks(3, 5, 8, seed + 100);
    const double alpha = 0.7, beta = -1.3;
    std::vector<Tensor> mix;
    for (std::size_t n = 0; n < 3; ++n) {
      Tensor m(u1[n].shape());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = alpha * u1[n][i] + beta * u2[n][i];
      mix.push_back(m);
    }
    const auto plan = spectral::select_low_frequencies(3, 5, 4);
    const Tensor f1 = spectral::fs_squeeze(stack_blocks(u1), plan);
    const Tensor f2 = spectral::fs_squeeze(stack_blocks(u2), plan);
    const Tensor fm = spectral::fs_squeeze(stack_blocks(mix), plan);
    for (std::size_t d = 0; d < 8; ++d) EXPECT_NEAR(fm[d], alpha * f1[d] + beta * f2[d], 1e-10);
  }
}

TEST(SpectralProperties, ConstantInputOrthogonality) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t l = 2; l <= 6; ++l) {
      const std::size_t m = std::min<std::size_t>(8, n * l);
      if (16 % m) continue;
      const auto plan = spectral::select_low_frequencies(n, l, m);
      const Tensor f = spectral::fs_squeeze(stack_blocks(constant_blocks(n, l, 16, -2.5)), plan);
      for (std::size_t d = 16 / m; d < 16; ++d) EXPECT_NEAR(f[d], 0.0, 1e-10);
    }
}

TEST(DctRoundtrip, Examples) {
  EXPECT_EQ(spectral::dct_roundtrip_oracle(Tensor({3, 2})), Tensor({3, 2}));
  const Tensor x = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_LT(max_abs_diff(spectral::dct_roundtrip_oracle(x), x), 1e-10);
  const Tensor c = spectral::dct2_orthonormal(Tensor({3, 4}, 1.7));
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i], 0.0, 1e-12);
  EXPECT_GT(std::abs(c[0]), 1.0);
}

TEST(DctRoundtrip, ReconstructionAndParseval) {
  SplitMix64 rng(123);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(8), l = 1 + rng.below(16);
    const Tensor x = uniform_tensor({n, l}, -3.0, 3.0, rng);
    EXPECT_LT(max_abs_diff(spectral::dct_roundtrip_oracle(x), x), 1e-10);
    const Tensor c = spectral::dct2_orthonormal(x);
    double ex = 0.0, ec = 0.0;
    for (double v : x.data()) ex += v * v;
    for (double v : c.data()) ec += v * v;
    EXPECT_NEAR(ex, ec, 1e-8);
  }
}

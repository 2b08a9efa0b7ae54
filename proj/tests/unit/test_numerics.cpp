#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "s2sent/numerics/gradcheck.hpp"
#include "s2sent/numerics/ops.hpp"
#include "s2sent/numerics/parameters.hpp"
#include "s2sent/numerics/rng.hpp"

using namespace s2sent;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -2.0, double hi = 2.0) {
  SplitMix64 rng(seed);
  return uniform_tensor(std::move(shape), lo, hi, rng);
}

// Scalar loss = sum(w * op(inputs)) with fixed random weights, so every
// output entry contributes a distinct cotangent.
using Op = std::function<Var(Graph&, std::vector<Var>&)>;

double check_op(const std::vector<Tensor>& inputs, const Op& op, std::uint64_t seed) {
  Tensor weights;
  auto loss_of = [&](const std::vector<Tensor>& xs, std::vector<Var>* vars, Graph& g) {
    std::vector<Var> v;
    for (const auto& x : xs) v.push_back(g.variable(x));
    const Var out = op(g, v);
    if (weights.size() == 0) weights = random_tensor(out.shape(), seed);
    if (vars) *vars = v;
    return ag::sum(ag::mul_const(out, weights));
  };
  Graph g;
  std::vector<Var> vars;
  const Var loss = loss_of(inputs, &vars, g);
  const Gradients grads = g.backward(loss);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto f = [&](const Tensor& probe) {
      std::vector<Tensor> xs = inputs;
      xs[k] = probe;
      Graph h;
      return loss_of(xs, nullptr, h).value().item();
    };
    const Tensor numeric = finite_difference_gradient(f, inputs[k], 1e-5);
    worst = std::max(worst, max_relative_error(grads.at(vars[k].id), numeric));
  }
  return worst;
}

}  // namespace

TEST(Tensor, ShapeAndStorageAgree) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_DOUBLE_EQ(t(1, 2), 1.5);
  EXPECT_THROW(Tensor({2, 0}), ContractError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ContractError);
}

TEST(Tensor, ReshapeKeepsRowMajorOrder) {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor r = m.reshaped({3, 2});
  EXPECT_DOUBLE_EQ(r(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(r(2, 0), 5.0);
  EXPECT_THROW(m.reshaped({4, 2}), ContractError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Tensor i2 = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(kernels::matmul(i2, m), m);
}

TEST(Matmul, OrthogonalRowGivesZero) {
  EXPECT_EQ(kernels::matmul(Tensor::matrix({{1, 0}}), Tensor::matrix({{0}, {5}})), Tensor::matrix({{0}}));
}

TEST(Matmul, HandSummedProduct) {
  const Tensor c = kernels::matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{5, 6}, {7, 8}}));
  EXPECT_EQ(c, Tensor::matrix({{19, 22}, {43, 50}}));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    kernels::matmul(Tensor({2, 3}), Tensor({2, 3}));
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3] x [2x3]"), std::string::npos) << e.what();
  }
}

TEST(Matmul, BlockedKernelMatchesNaiveLoop) {
  for (std::size_t p : {1u, 3u, 5u, 9u}) {
    for (std::size_t s : {1u, 7u, 16u, 33u}) {
      const Tensor a = random_tensor({p, 13}, p * 100 + s);
      const Tensor b = random_tensor({13, s}, p * 7 + s);
      const Tensor c = kernels::matmul(a, b);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < s; ++j) {
          double acc = 0.0;
          for (std::size_t k = 0; k < 13; ++k) acc += a(i, k) * b(k, j);
          EXPECT_NEAR(c(i, j), acc, 1e-12);
        }
      const Tensor bt = kernels::transpose(b);
      EXPECT_LT(max_abs_diff(kernels::matmul_nt(a, bt), c), 1e-12);
    }
  }
}

TEST(Activation, Examples) {
  EXPECT_DOUBLE_EQ(kernels::activate(0.0, Activation::sigmoid), 0.5);
  EXPECT_DOUBLE_EQ(kernels::activate(-3.0, Activation::relu), 0.0);
  EXPECT_DOUBLE_EQ(kernels::activate(3.0, Activation::relu), 3.0);
  EXPECT_NEAR(kernels::activate(0.5, Activation::tanh), 0.46211715726000974, 1e-15);
  EXPECT_THROW(parse_activation("gelu"), ContractError);
}

TEST(Activation, SigmoidIsStrictlyInsideUnitInterval) {
  for (double x : {-30.0, -5.0, 0.0, 5.0, 30.0}) {
    const double y = kernels::sigmoid(x);
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
  }
}

TEST(Activation, SigmoidSymmetry) {
  SplitMix64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-40.0, 40.0);
    EXPECT_NEAR(kernels::sigmoid(x) + kernels::sigmoid(-x), 1.0, 1e-12);
  }
}

TEST(Softmax, Examples) {
  const Tensor eq = kernels::softmax_over_axis(Tensor::vector({2.5, 2.5, 2.5}), 0);
  for (double v : eq.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const Tensor two = kernels::softmax_over_axis(Tensor::vector({1.0, 0.0}), 0);
  EXPECT_NEAR(two[0], 0.7310585786300049, 1e-12);
  EXPECT_NEAR(two[1], 0.2689414213699951, 1e-12);
  const Tensor big = kernels::softmax_over_axis(Tensor::vector({1000.0, 0.0}), 0);
  EXPECT_TRUE(big.all_finite());
  EXPECT_NEAR(big[0], 1.0, 1e-15);
  EXPECT_NEAR(big[1], 0.0, 1e-15);
  EXPECT_THROW(kernels::softmax_over_axis(Tensor({2, 2}), 2), ContractError);
}

TEST(Softmax, SlicesSumToOneAlongEveryAxis) {
  const Tensor x = random_tensor({3, 4, 5}, 11, -10.0, 10.0);
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const Tensor s = kernels::softmax_over_axis(x, axis);
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < 3; ++i) inner *= x.dim(i);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        double total = 0.0;
        for (std::size_t k = 0; k < x.dim(axis); ++k) {
          const double v = s[o * x.dim(axis) * inner + k * inner + in];
          EXPECT_GT(v, 0.0);
          EXPECT_LE(v, 1.0);
          total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
  }
}

TEST(Backward, SumGivesOnes) {
  Graph g;
  const Var x = g.parameter(Tensor::vector({1.0, -2.0, 3.0}));
  const Gradients grads = g.backward(ag::sum(x));
  EXPECT_EQ(grads.at(x.id), Tensor::vector({1.0, 1.0, 1.0}));
}

TEST(Backward, SquareGivesTwiceInput) {
  Graph g;
  const Var x = g.parameter(Tensor::vector({1.0, 2.0}));
  const Gradients grads = g.backward(ag::sum(ag::mul(x, x)));
  EXPECT_EQ(grads.at(x.id), Tensor::vector({2.0, 4.0}));
}

TEST(Backward, NonScalarLossIsRejected) {
  Graph g;
  const Var x = g.parameter(Tensor::vector({1.0, 2.0}));
  EXPECT_THROW(g.backward(x), ContractError);
}

TEST(Backward, ConstantsGetNoGradientVariablesDo) {
  Graph g;
  const Var c = g.constant(Tensor::vector({1.0, 2.0}));
  const Var v = g.variable(Tensor::vector({3.0, 4.0}));
  const Gradients grads = g.backward(ag::sum(ag::mul(c, v)));
  EXPECT_EQ(grads.count(c.id), 0u);
  EXPECT_EQ(grads.at(v.id), Tensor::vector({1.0, 2.0}));
  EXPECT_FALSE(g.is_trainable(v.id));
}

TEST(Backward, UnreachedParameterGetsZeros) {
  Graph g;
  const Var x = g.parameter(Tensor::vector({1.0}));
  const Var unused = g.parameter(Tensor::vector({5.0, 6.0}));
  const Gradients grads = g.backward(ag::sum(x));
  EXPECT_EQ(grads.at(unused.id), Tensor::vector({0.0, 0.0}));
}

TEST(Backward, TopologicalOrder) {
  Graph g;
  const Var a = g.parameter(random_tensor({2, 3}, 1));
  const Var b = g.parameter(random_tensor({3, 2}, 2));
  ag::sum(ag::relu(ag::matmul(a, b)));
  for (NodeId id = 0; id < g.size(); ++id)
    for (NodeId in : g.inputs(id)) EXPECT_LT(in, id);
}

TEST(Backward, BitIdenticalAcrossRuns) {
  auto run = [] {
    Graph g;
    const Var a = g.parameter(random_tensor({4, 5}, 1));
    const Var b = g.parameter(random_tensor({5, 3}, 2));
    const Var loss = ag::sum(ag::softmax(ag::tanh(ag::matmul(a, b)), 1));
    const Gradients grads = g.backward(loss);
    return std::make_pair(grads.at(a.id), grads.at(b.id));
  };
  EXPECT_EQ(run(), run());
}

TEST(FiniteDifference, SumGivesOnes) {
  const Tensor x = random_tensor({5}, 4);
  const Tensor g = finite_difference_gradient(
      [](const Tensor& t) {
        double s = 0.0;
        for (double v : t.data()) s += v;
        return s;
      },
      x, 1e-5);
  for (double v : g.data()) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(FiniteDifference, QuadraticIsExactUpToRounding) {
  const Tensor g = finite_difference_gradient([](const Tensor& t) { return t[0] * t[0]; },
                                              Tensor::vector({3.0}), 1e-5);
  EXPECT_NEAR(g[0], 6.0, 1e-8);
}

TEST(FiniteDifference, RejectsNonPositiveStep) {
  EXPECT_THROW(finite_difference_gradient([](const Tensor&) { return 0.0; }, Tensor::vector({1.0}), 0.0),
               ContractError);
}

// Analytic vs central-difference gradients for every differentiable op on
// random inputs in [-2, 2] with dimensions <= 8.
struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  Op op;
};

class OpGradient : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  const OpCase& c = GetParam();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < c.shapes.size(); ++i) inputs.push_back(random_tensor(c.shapes[i], seed * 31 + i));
    EXPECT_LT(check_op(inputs, c.op, seed), 1e-5) << c.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllOps, OpGradient,
    ::testing::Values(
        OpCase{"matmul", {{3, 4}, {4, 5}}, [](Graph&, auto& v) { return ag::matmul(v[0], v[1]); }},
        OpCase{"matmul_nt", {{3, 4}, {5, 4}}, [](Graph&, auto& v) { return ag::matmul_nt(v[0], v[1]); }},
        OpCase{"add", {{3, 4}, {3, 4}}, [](Graph&, auto& v) { return ag::add(v[0], v[1]); }},
        OpCase{"sub", {{3, 4}, {3, 4}}, [](Graph&, auto& v) { return ag::sub(v[0], v[1]); }},
        OpCase{"mul", {{3, 4}, {3, 4}}, [](Graph&, auto& v) { return ag::mul(v[0], v[1]); }},
        OpCase{"scale", {{2, 3}}, [](Graph&, auto& v) { return ag::scale(v[0], -1.7); }},
        OpCase{"add_row", {{4, 3}, {3}}, [](Graph&, auto& v) { return ag::add_row(v[0], v[1]); }},
        OpCase{"mul_row", {{4, 3}, {3}}, [](Graph&, auto& v) { return ag::mul_row(v[0], v[1]); }},
        OpCase{"mul_col", {{4, 3}, {4}}, [](Graph&, auto& v) { return ag::mul_col(v[0], v[1]); }},
        OpCase{"sigmoid", {{3, 3}}, [](Graph&, auto& v) { return ag::sigmoid(v[0]); }},
        OpCase{"tanh", {{3, 3}}, [](Graph&, auto& v) { return ag::tanh(v[0]); }},
        OpCase{"relu", {{3, 3}}, [](Graph&, auto& v) { return ag::relu(v[0]); }},
        OpCase{"softmax_rows", {{3, 5}}, [](Graph&, auto& v) { return ag::softmax(v[0], 1); }},
        OpCase{"softmax_cols", {{3, 5}}, [](Graph&, auto& v) { return ag::softmax(v[0], 0); }},
        OpCase{"layer_norm", {{3, 6}, {6}, {6}},
               [](Graph&, auto& v) { return ag::layer_norm(v[0], v[1], v[2]); }},
        OpCase{"slice_concat", {{3, 8}},
               [](Graph&, auto& v) {
                 return ag::concat_cols({ag::slice_cols(v[0], 4, 8), ag::slice_cols(v[0], 0, 4)});
               }},
        OpCase{"stack_rows", {{4}, {4}, {4}}, [](Graph&, auto& v) { return ag::stack_rows({v[0], v[1], v[2]}); }},
        OpCase{"row", {{3, 4}}, [](Graph&, auto& v) { return ag::row(v[0], 1); }},
        OpCase{"reshape", {{2, 6}}, [](Graph&, auto& v) { return ag::reshape(v[0], {3, 4}); }},
        OpCase{"mean_rows", {{5, 3}}, [](Graph&, auto& v) { return ag::mean_rows(v[0], 3); }},
        OpCase{"gather_rows", {{6, 3}},
               [](Graph&, auto& v) { return ag::gather_rows(v[0], {4, 1, 4, 0}); }},
        OpCase{"normalize_rows", {{3, 4}}, [](Graph&, auto& v) { return ag::normalize_rows(v[0]); }},
        OpCase{"cross_entropy_diagonal", {{4, 4}},
               [](Graph&, auto& v) { return ag::cross_entropy_diagonal(v[0]); }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });

TEST(Rng, SplitMixIsDeterministicAndSeedSensitive) {
  SplitMix64 a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
}

TEST(Rng, UniformStaysInRange) {
  SplitMix64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.below(6), 6u);
  }
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(9, {3, 4}), derive_seed(9, {3, 4}));
}

TEST(Parameters, CountsAndBinds) {
  ParameterList p;
  p.add("a", Tensor({2, 3}));
  p.add("b", Tensor({4}));
  EXPECT_EQ(p.scalar_count(), 10u);
  EXPECT_EQ(p.name(1), "b");
  Graph g;
  const auto vars = p.bind(g, true);
  ASSERT_EQ(vars.size(), 2u);
  EXPECT_TRUE(g.is_trainable(vars[0].id));
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "evouct/expr.hpp"

using namespace evouct;

namespace {

// Closed-form UCT written out here so the tree evaluator is checked against
// something it does not share code with.
double closed_form_uct(double q, double n_parent, double n_child, double c) {
  return q + c * std::sqrt(2.0 * std::log(n_parent) / n_child);
}

NodeContext random_context(Rng& rng) {
  std::uniform_int_distribution<int> parent(1, 100000);
  const int np = parent(rng);
  std::uniform_int_distribution<int> child(1, np);
  return {uniform01(rng), static_cast<double>(np), static_cast<double>(child(rng))};
}

Expression random_depth8(Rng& rng) {
  for (;;) {
    auto e = random_subtree(8, rng);
    if (e.depth() == 8) return e;
  }
}

}  // namespace

TEST(ProtectedOps, DivisionBelowThresholdReturnsOne) {
  EXPECT_EQ(protected_div(1.0, 0.0005), 1.0);
  EXPECT_EQ(protected_div(7.0, 0.0), 1.0);
  EXPECT_EQ(protected_div(7.0, -0.0009), 1.0);
  EXPECT_DOUBLE_EQ(protected_div(1.0, 0.001), 1000.0);
  EXPECT_DOUBLE_EQ(protected_div(3.0, -2.0), -1.5);
}

TEST(ProtectedOps, LogAndSqrtUseMagnitude) {
  EXPECT_EQ(protected_log(0.0), 0.0);
  EXPECT_EQ(protected_log(-0.0005), 0.0);
  EXPECT_DOUBLE_EQ(protected_log(-std::numbers::e), 1.0);
  EXPECT_DOUBLE_EQ(protected_sqrt(-4.0), 2.0);
}

TEST(Evaluate, ConstantLeaf) {
  const auto e = Expression::constant(std::numbers::sqrt2);
  EXPECT_DOUBLE_EQ(e.evaluate({0.3, 10, 2}), 1.4142135623730951);
}

TEST(Evaluate, TerminalsReadContext) {
  const NodeContext ctx{0.25, 40, 7};
  EXPECT_EQ(Expression::terminal(Op::Q).evaluate(ctx), 0.25);
  EXPECT_EQ(Expression::terminal(Op::NParent).evaluate(ctx), 40.0);
  EXPECT_EQ(Expression::terminal(Op::NChild).evaluate(ctx), 7.0);
}

TEST(Evaluate, OperandOrder) {
  const auto e = Expression::parse("(sub (div Np Nc) Q)");
  EXPECT_DOUBLE_EQ(e.evaluate({0.5, 12, 4}), 2.5);
}

TEST(UctSeed, HandEvaluatedValues) {
  // Frozen from an independent evaluation of q + c*sqrt(2 ln n / n_j).
  EXPECT_NEAR(uct_seed(1.0).evaluate({0.5, 10, 5}), 1.4597051824376162, 1e-12);
  EXPECT_NEAR(uct_seed(std::numbers::sqrt2).evaluate({0.5, 100, 10}), 1.8572280848830225, 1e-12);
  EXPECT_EQ(uct_seed(1.0).evaluate({0.0, 1, 1}), 0.0);
}

TEST(UctSeed, MatchesClosedFormOnRandomContexts) {
  Rng rng(7);
  for (double c : kConstantSet) {
    const auto seed = uct_seed(c);
    for (int i = 0; i < 1000; ++i) {
      const auto ctx = random_context(rng);
      ASSERT_NEAR(seed.evaluate(ctx), closed_form_uct(ctx.q, ctx.n_parent, ctx.n_child, c), 1e-9);
    }
  }
}

TEST(UctSeed, ShapeAndText) {
  const auto e = uct_seed(std::numbers::sqrt2);
  EXPECT_EQ(e.depth(), 7u);
  EXPECT_EQ(e.to_string(),
            "(add Q (mul (k 1.4142135623730951) (sqrt (div (mul (k 2) (log Np)) Nc))))");
  EXPECT_THROW(uct_seed(0.0), std::invalid_argument);
}

TEST(Expression, RejectsMalformedSequences) {
  EXPECT_THROW(Expression({}), std::invalid_argument);
  EXPECT_THROW(Expression({{Op::Add}, {Op::Q}}), std::invalid_argument);
  EXPECT_THROW(Expression({{Op::Q}, {Op::Q}}), std::invalid_argument);
  EXPECT_THROW(Expression({{Op::Const, -1.0}}), std::invalid_argument);
  // Chain of nine sqrt nodes over a leaf: depth 10.
  std::vector<Token> deep(9, Token{Op::Sqrt});
  deep.push_back({Op::Q});
  EXPECT_THROW(Expression(std::move(deep)), std::invalid_argument);
}

TEST(Expression, DepthAndSubtreeHelpers) {
  const auto e = Expression::parse("(add Q (log (mul Np Nc)))");
  EXPECT_EQ(e.depth(), 4u);
  EXPECT_EQ(e.depth_at(0), 1u);
  EXPECT_EQ(e.depth_at(1), 2u);
  EXPECT_EQ(e.depth_at(2), 2u);
  EXPECT_EQ(e.depth_at(4), 4u);
  EXPECT_EQ(e.subtree_end(2), e.size());
  EXPECT_EQ(e.subtree_end(3), e.size());
  EXPECT_EQ(e.subtree_end(1), 2u);
  EXPECT_EQ(e.replace_subtree(2, Expression::terminal(Op::NChild)).to_string(), "(add Q Nc)");
}

TEST(Evaluate, TotalOnExtremeInputs) {
  // Full binary mul tree of depth 8 over Np: 5000^128 overflows a double.
  std::vector<Token> tokens;
  auto build = [&](auto&& self, int depth) -> void {
    if (depth == 1) {
      tokens.push_back({Op::NParent});
      return;
    }
    tokens.push_back({Op::Mul});
    self(self, depth - 1);
    self(self, depth - 1);
  };
  build(build, 8);
  const Expression product(tokens);
  EXPECT_TRUE(std::isfinite(product.evaluate({0.5, 5000, 10})));

  const Expression difference({{Op::Sub}, {Op::Mul}, {Op::Mul}, {Op::Mul}, {Op::NParent},
                               {Op::NParent}, {Op::NParent}, {Op::NParent}, {Op::Const, 1.0}});
  EXPECT_TRUE(std::isfinite(difference.evaluate({0.0, 1e200, 1})));
}

TEST(Evaluate, NeverNonFiniteOnRandomTrees) {
  Rng rng(11);
  const std::vector<NodeContext> contexts{
      {0, 1, 0}, {1, 1, 1}, {0.5, 5000, 2500}, {0, 1e6, 1}, {1e-300, 1e300, 1e300}};
  for (int i = 0; i < 20000; ++i) {
    const auto e = random_subtree(8, rng);
    for (const auto& ctx : contexts) {
      const double v = e.evaluate(ctx);
      ASSERT_TRUE(std::isfinite(v)) << e.to_string();
      ASSERT_EQ(v, e.evaluate(ctx));
    }
  }
}

TEST(RandomSubtree, DepthOneIsAlwaysTerminal) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto e = random_subtree(1, rng);
    ASSERT_EQ(e.size(), 1u);
    ASSERT_FALSE(is_function(e.root().op));
  }
}

TEST(RandomSubtree, RespectsDepthBudget) {
  Rng rng(5);
  for (std::size_t d = 1; d <= kMaxExpressionDepth; ++d) {
    for (int i = 0; i < 2000; ++i) ASSERT_LE(random_subtree(d, rng).depth(), d);
  }
  EXPECT_THROW(random_subtree(0, rng), std::invalid_argument);
  EXPECT_THROW(random_subtree(9, rng), std::invalid_argument);
}

TEST(RandomSubtree, TerminalKindsAreUniform) {
  Rng rng(99);
  std::array<int, 4> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto t = random_subtree(1, rng).root();
    switch (t.op) {
      case Op::Q: ++counts[0]; break;
      case Op::NParent: ++counts[1]; break;
      case Op::NChild: ++counts[2]; break;
      case Op::Const:
        ++counts[3];
        ASSERT_NE(std::find(kConstantSet.begin(), kConstantSet.end(), t.value), kConstantSet.end());
        break;
      default: FAIL();
    }
  }
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / draws, 0.25, 0.02);
}

TEST(Mutate, DepthCapHoldsOnDeepTrees) {
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const auto e = random_depth8(rng);
    const auto before = e;
    const auto m = mutate(e, rng);
    ASSERT_LE(m.depth(), kMaxExpressionDepth);
    ASSERT_EQ(e, before);
  }
}

TEST(Mutate, SingleLeafCanChange) {
  const auto q = Expression::terminal(Op::Q);
  bool changed = false;
  for (std::uint64_t seed = 0; seed < 100 && !changed; ++seed) {
    Rng rng(seed);
    changed = !(mutate(q, rng).root() == q.root());
  }
  EXPECT_TRUE(changed);
}

TEST(Mutate, InternalNodeChosenNinetyPercent) {
  // Five internal nodes: add, mul, sqrt, div, log.
  const auto e = Expression::parse("(add Q (mul Nc (sqrt (div (log Np) Nc))))");
  Rng rng(2024);
  const int trials = 100000;
  int internal = 0;
  for (int i = 0; i < trials; ++i) {
    if (is_function(e.tokens()[choose_mutation_point(e, rng)].op)) ++internal;
  }
  EXPECT_NEAR(static_cast<double>(internal) / trials, 0.90, 0.01);
}

TEST(Mutate, LeafOnlyTreeAlwaysPicksTheLeaf) {
  Rng rng(1);
  const auto e = Expression::terminal(Op::NChild);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(choose_mutation_point(e, rng), 0u);
}

TEST(Mutate, ChainsFromSeedKeepInvariants) {
  Rng rng(31);
  for (int chain = 0; chain < 300; ++chain) {
    auto e = uct_seed(std::numbers::sqrt2);
    for (int step = 0; step < 50; ++step) {
      e = mutate(e, rng);
      ASSERT_LE(e.depth(), kMaxExpressionDepth);
      for (const auto& t : e.tokens()) {
        if (t.op != Op::Const) continue;
        ASSERT_NE(std::find(kConstantSet.begin(), kConstantSet.end(), t.value), kConstantSet.end());
      }
    }
  }
}

TEST(Serialisation, RoundTripIsExact) {
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const auto e = random_subtree(8, rng);
    const auto text = e.to_string();
    ASSERT_EQ(Expression::parse(text), e) << text;
  }
  const auto odd = Expression::constant(0.1 + 0.2);
  EXPECT_EQ(Expression::parse(odd.to_string()), odd);
}

TEST(Serialisation, ParseErrors) {
  EXPECT_THROW(Expression::parse(""), std::invalid_argument);
  EXPECT_THROW(Expression::parse("(add Q)"), std::invalid_argument);
  EXPECT_THROW(Expression::parse("(pow Q Q)"), std::invalid_argument);
  EXPECT_THROW(Expression::parse("(k abc)"), std::invalid_argument);
  EXPECT_THROW(Expression::parse("Q Q"), std::invalid_argument);
  EXPECT_THROW(Expression::parse("(log Q"), std::invalid_argument);
  EXPECT_EQ(Expression::parse("  ( log   Q )  ").to_string(), "(log Q)");
}

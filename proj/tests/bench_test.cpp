#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "evouct/bench.hpp"

using namespace evouct;
using namespace evouct::bench;

TEST(Interval, BisectionChildren) {
  const IntervalTree tree;
  EXPECT_EQ(tree.child({0, 1}, 0), (IntervalState{0, 0.5}));
  EXPECT_EQ(tree.child({0, 1}, 1), (IntervalState{0.5, 1}));
  EXPECT_EQ(tree.child({0.5, 1}, 0), (IntervalState{0.5, 0.75}));
  EXPECT_EQ(tree.child({0.5, 1}, 1), (IntervalState{0.75, 1}));
  const IntervalState s{0.25, 0.375};
  EXPECT_EQ(tree.child(s, 0).width(), s.width() / 2);
  EXPECT_EQ(tree.child(s, 1).width(), s.width() / 2);
  EXPECT_THROW(tree.child(s, 2), std::out_of_range);
}

TEST(Interval, TerminalThreshold) {
  const IntervalTree tree;
  EXPECT_FALSE(tree.is_terminal({0, 1}));
  EXPECT_TRUE(tree.is_terminal({0, std::ldexp(1.0, -17)}));
  EXPECT_FALSE(tree.is_terminal({0, std::ldexp(1.0, -16)}));
  EXPECT_EQ(tree.terminal_depth(), 17u);
  EXPECT_THROW(tree.child({0, std::ldexp(1.0, -17)}, 0), std::logic_error);
}

TEST(Interval, EveryPathHasLengthSeventeenAndCentresFormTheGrid) {
  // Walk the full bisection tree (2^17 leaves) and check depths and centres.
  const IntervalTree tree;
  std::set<double> centres;
  std::vector<std::pair<IntervalState, int>> stack{{{0, 1}, 0}};
  while (!stack.empty()) {
    auto [s, d] = stack.back();
    stack.pop_back();
    if (tree.is_terminal(s)) {
      ASSERT_EQ(d, 17);
      centres.insert(centre(s));
      continue;
    }
    ASSERT_LT(d, 17);
    // Halves tile the parent exactly.
    const auto lo = tree.child(s, 0);
    const auto hi = tree.child(s, 1);
    ASSERT_EQ(lo.a, s.a);
    ASSERT_EQ(lo.b, hi.a);
    ASSERT_EQ(hi.b, s.b);
    stack.push_back({lo, d + 1});
    stack.push_back({hi, d + 1});
  }
  ASSERT_EQ(centres.size(), 1u << 17);
  std::size_t k = 0;
  for (double c : centres) {
    ASSERT_EQ(c, static_cast<double>(2 * k + 1) * std::ldexp(1.0, -18));
    ++k;
  }
}

TEST(Interval, CentreIsMidpoint) {
  EXPECT_EQ(centre({0, 1}), 0.5);
  EXPECT_EQ(centre({0.5, 0.75}), 0.625);
  const IntervalState s{0.3, 0.30001};
  EXPECT_GT(centre(s), s.a);
  EXPECT_LT(centre(s), s.b);
}

TEST(Functions, HandEvaluatedValues) {
  EXPECT_DOUBLE_EQ(eval_function(TestFunction::F1, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(eval_function(TestFunction::F2, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(eval_function(TestFunction::F4, 0.0), 0.0);
  EXPECT_NEAR(eval_function(TestFunction::F4, 0.1), 0.98, 1e-12);
  EXPECT_NEAR(eval_function(TestFunction::F5, 0.5), 0.90, 1e-12);
  // 0.35 + 0.5*|sin(1/0.75^5)|, evaluated independently.
  EXPECT_NEAR(eval_function(TestFunction::F3, 0.75), 0.7891749261968658, 1e-12);
  EXPECT_EQ(eval_function(TestFunction::F3, 0.0), 0.5);
}

TEST(Functions, RejectsOutOfDomain) {
  EXPECT_THROW(eval_function(TestFunction::F1, -0.01), std::out_of_range);
  EXPECT_THROW(eval_function(TestFunction::F1, 1.01), std::out_of_range);
  EXPECT_THROW(eval_function(TestFunction::F1, std::nan("")), std::out_of_range);
}

TEST(Functions, GridArgmaxMatchesKnownOptima) {
  const int n = 1000000;
  auto argmax = [&](TestFunction f) {
    double best_x = 0, best = -1;
    for (int i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double v = eval_function(f, x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    return best_x;
  };
  EXPECT_NEAR(argmax(TestFunction::F1), 0.5, 1e-6);
  // The linear term shifts f4/f5 optima a hair left of 0.1.
  EXPECT_NEAR(argmax(TestFunction::F4), 0.1, 5e-4);
  EXPECT_NEAR(argmax(TestFunction::F5), 0.1, 5e-5);
}

TEST(Functions, Ids) {
  for (auto f : all_functions()) EXPECT_EQ(parse_function_id(function_id(f)), f);
  EXPECT_THROW(parse_function_id("f6"), std::invalid_argument);
}

TEST(Environment, RewardIsBernoulliAtCentre) {
  Rng rng(4);
  // Terminal interval centred on 0.5 where f1 = 1 (to rounding).
  const double w = std::ldexp(1.0, -18);
  FunctionEnvironment f1(TestFunction::F1);
  const IntervalState at_peak{0.5 - w, 0.5 + w};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(f1.sample_reward(at_peak, rng), 1.0);

  FunctionEnvironment f4(TestFunction::F4);
  const IntervalState at_zero{0.0, 0.0 + 2 * w};
  const IntervalState near_opt{0.1 - w, 0.1 + w};
  double zero_sum = 0, opt_sum = 0;
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    zero_sum += f4.sample_reward(at_zero, rng);
    opt_sum += f4.sample_reward(near_opt, rng);
  }
  EXPECT_LT(zero_sum / samples, 0.01);
  EXPECT_NEAR(opt_sum / samples, 0.98, 0.01);
  EXPECT_EQ(f4.reward_draws(), 2u * samples);
  EXPECT_THROW(f4.sample_reward({0, 1}, rng), std::logic_error);
}

TEST(Environment, HalfProbabilityMean) {
  // f1(1/6) = sin(pi/6) = 0.5; a threshold of 1 makes [0, 1/3] terminal.
  Rng rng(12);
  FunctionEnvironment env(TestFunction::F1, IntervalTree(2, 1.0));
  const IntervalState s{0.0, 1.0 / 3.0};
  ASSERT_TRUE(env.is_terminal(s));
  double sum = 0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) sum += env.sample_reward(s, rng);
  EXPECT_NEAR(sum / samples, 0.5, 0.005);
}

TEST(Environment, ZeroProbabilityNeverPays) {
  Rng rng(1);
  FunctionEnvironment env(TestFunction::F4, IntervalTree(2, 1.0));
  const IntervalState s{0.0, 0.0};  // degenerate, centred on f4's zero
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(env.sample_reward(s, rng), 0.0);
}

TEST(Functions, RangeAndClampCounter) {
  for (auto f : all_functions()) {
    reset_clamp_hits();
    for (int i = 0; i <= 100000; ++i) {
      const double v = eval_function(f, static_cast<double>(i) / 100000);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    if (f != TestFunction::F3) EXPECT_EQ(clamp_hits(), 0u) << function_id(f);
  }
}

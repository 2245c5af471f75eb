#pragma once

#include "evouct/bench.hpp"
#include "evouct/mcts.hpp"

namespace evouct::test_support {

// Interval tree whose terminals all pay Bernoulli(p).
class ConstantEnvironment {
 public:
  using State = bench::IntervalState;
  explicit ConstantEnvironment(double p, bench::IntervalTree tree = bench::IntervalTree())
      : p_(p), tree_(tree) {}

  State initial_state() const { return {0.0, 1.0}; }
  std::size_t action_count(const State& s) const {
    return tree_.is_terminal(s) ? 0 : tree_.branching();
  }
  State apply(const State& s, std::size_t a) const { return tree_.child(s, a); }
  bool is_terminal(const State& s) const { return tree_.is_terminal(s); }
  double centre(const State& s) const { return bench::centre(s); }
  double sample_reward(const State&, Rng& rng) {
    ++draws;
    return bernoulli(rng, p_) ? 1.0 : 0.0;
  }

  std::uint64_t draws = 0;

 private:
  double p_;
  bench::IntervalTree tree_;
};

static_assert(mcts::Environment<ConstantEnvironment>);

}  // namespace evouct::test_support

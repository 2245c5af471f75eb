#pragma once

// One-dimensional function optimisation posed as a search tree: each state
// is a sub-interval of [0,1], actions split it into equal parts, and a
// terminal interval pays a Bernoulli reward at its centre.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evouct/rng.hpp"

namespace evouct::bench {

struct IntervalState {
  double a = 0.0;
  double b = 1.0;

  double width() const { return b - a; }
  friend bool operator==(const IntervalState&, const IntervalState&) = default;
};

enum class TestFunction : std::uint8_t { F1, F2, F3, F4, F5 };

inline constexpr std::size_t kDefaultBranching = 2;
inline constexpr double kDefaultThreshold = 1e-5;

std::string_view function_id(TestFunction f);
/// Accepts "f1".."f5"; throws std::invalid_argument otherwise.
TestFunction parse_function_id(std::string_view id);

/// Raw value of the benchmark function before the range clamp.
double raw_function(TestFunction f, double x);

/// Value in [0,1]. Throws std::out_of_range for x outside [0,1].
double eval_function(TestFunction f, double x);

/// Number of eval_function calls on this thread whose raw value had to be
/// clamped into [0,1].
std::uint64_t clamp_hits();
void reset_clamp_hits();

double centre(const IntervalState& s);

/// Interval tree with configurable branching factor and width threshold.
class IntervalTree {
 public:
  explicit IntervalTree(std::size_t branching = kDefaultBranching,
                        double threshold = kDefaultThreshold);

  std::size_t branching() const { return branching_; }
  double threshold() const { return threshold_; }

  bool is_terminal(const IntervalState& s) const { return s.width() < threshold_; }

  /// The i-th of `branching` equal parts, in ascending order. Throws
  /// std::logic_error on a terminal state.
  IntervalState child(const IntervalState& s, std::size_t i) const;

  /// Depth at which every path becomes terminal.
  std::size_t terminal_depth() const;

 private:
  std::size_t branching_;
  double threshold_;
};

/// The search environment used by the MCTS engine. Counts every reward it
/// draws so budgets can be audited.
class FunctionEnvironment {
 public:
  using State = IntervalState;

  explicit FunctionEnvironment(TestFunction f, IntervalTree tree = IntervalTree());

  TestFunction function() const { return function_; }
  const IntervalTree& tree() const { return tree_; }

  State initial_state() const { return {0.0, 1.0}; }
  std::size_t action_count(const State& s) const {
    return tree_.is_terminal(s) ? 0 : tree_.branching();
  }
  State apply(const State& s, std::size_t action) const { return tree_.child(s, action); }
  bool is_terminal(const State& s) const { return tree_.is_terminal(s); }
  double centre(const State& s) const { return bench::centre(s); }

  /// 1 with probability f(centre(s)), else 0. Throws std::logic_error on a
  /// non-terminal state.
  double sample_reward(const State& s, Rng& rng);

  std::uint64_t reward_draws() const { return draws_; }

 private:
  TestFunction function_;
  IntervalTree tree_;
  std::uint64_t draws_ = 0;
};

std::vector<TestFunction> all_functions();

}  // namespace evouct::bench

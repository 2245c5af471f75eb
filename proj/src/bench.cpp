#include "evouct/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace evouct::bench {

namespace {
thread_local std::uint64_t g_clamp_hits = 0;
}

std::string_view function_id(TestFunction f) {
  switch (f) {
    case TestFunction::F1: return "f1";
    case TestFunction::F2: return "f2";
    case TestFunction::F3: return "f3";
    case TestFunction::F4: return "f4";
    case TestFunction::F5: return "f5";
  }
  return "?";
}

TestFunction parse_function_id(std::string_view id) {
  for (auto f : all_functions()) {
    if (function_id(f) == id) return f;
  }
  throw std::invalid_argument("unknown function id '" + std::string(id) + "' (expected f1..f5)");
}

std::vector<TestFunction> all_functions() {
  return {TestFunction::F1, TestFunction::F2, TestFunction::F3, TestFunction::F4,
          TestFunction::F5};
}

double raw_function(TestFunction f, double x) {
  using std::numbers::pi;
  switch (f) {
    case TestFunction::F1:
      return std::sin(pi * x);
    case TestFunction::F2:
      return 0.5 * std::sin(13.0 * x) * std::sin(27.0 * x) + 0.5;
    case TestFunction::F3: {
      // 1/x^5 is singular at 0; the branch infimum stands in.
      if (x == 0.0) return 0.5;
      const double wave = 0.5 * std::abs(std::sin(1.0 / std::pow(x, 5)));
      return (x < 0.5 ? 0.5 : 7.0 / 20.0) + wave;
    }
    case TestFunction::F4:
      return 0.5 * x + (-0.7 * x + 1.0) * std::pow(std::sin(5.0 * pi * x), 4);
    case TestFunction::F5:
      return 0.5 * x + (-0.7 * x + 1.0) * std::pow(std::sin(5.0 * pi * x), 80);
  }
  return 0.0;
}

double eval_function(TestFunction f, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::out_of_range("function argument " + std::to_string(x) + " outside [0,1]");
  }
  const double raw = raw_function(f, x);
  const double clamped = std::clamp(raw, 0.0, 1.0);
  if (clamped != raw) ++g_clamp_hits;
  return clamped;
}

std::uint64_t clamp_hits() { return g_clamp_hits; }
void reset_clamp_hits() { g_clamp_hits = 0; }

double centre(const IntervalState& s) { return (s.a + s.b) / 2.0; }

IntervalTree::IntervalTree(std::size_t branching, double threshold)
    : branching_(branching), threshold_(threshold) {
  if (branching_ < 2) throw std::invalid_argument("branching factor must be at least 2");
  if (!(threshold_ > 0.0 && threshold_ <= 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1]");
  }
}

IntervalState IntervalTree::child(const IntervalState& s, std::size_t i) const {
  if (is_terminal(s)) throw std::logic_error("terminal interval has no children");
  if (i >= branching_) throw std::out_of_range("action index out of range");
  const double step = s.width() / static_cast<double>(branching_);
  const double lo = s.a + step * static_cast<double>(i);
  // The last part ends exactly on b so halves tile without drift.
  const double hi = i + 1 == branching_ ? s.b : s.a + step * static_cast<double>(i + 1);
  return {lo, hi};
}

std::size_t IntervalTree::terminal_depth() const {
  std::size_t depth = 0;
  double width = 1.0;
  while (!(width < threshold_)) {
    width /= static_cast<double>(branching_);
    ++depth;
  }
  return depth;
}

FunctionEnvironment::FunctionEnvironment(TestFunction f, IntervalTree tree)
    : function_(f), tree_(tree) {}

double FunctionEnvironment::sample_reward(const State& s, Rng& rng) {
  if (!is_terminal(s)) throw std::logic_error("reward requested for a non-terminal interval");
  ++draws_;
  return bernoulli(rng, eval_function(function_, centre(s))) ? 1.0 : 0.0;
}

}  // namespace evouct::bench

#pragma once

// GP expression trees over node statistics. An Expression is the evolvable
// replacement for the closed-form UCT selection score.

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evouct/rng.hpp"

namespace evouct {

/// Statistics the selection formula may look at when scoring a child.
struct NodeContext {
  double q = 0.0;         // mean reward of the child, 0 when unvisited
  double n_parent = 1.0;  // parent visit count
  double n_child = 0.0;   // child visit count
};

enum class Op : std::uint8_t {
  Add,
  Sub,
  Mul,
  Div,   // protected
  Log,   // protected
  Sqrt,  // protected
  Q,
  NParent,
  NChild,
  Const,
};

inline constexpr std::size_t kMaxExpressionDepth = 8;

/// Values a mutated or freshly grown constant may take.
inline constexpr std::array<double, 5> kConstantSet{0.5, 1.0, std::numbers::sqrt2, 2.0, 3.0};

constexpr int arity(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Log:
    case Op::Sqrt:
      return 1;
    default:
      return 0;
  }
}

constexpr bool is_function(Op op) { return arity(op) > 0; }

struct Token {
  Op op = Op::Q;
  double value = 0.0;  // only meaningful for Op::Const

  friend bool operator==(const Token&, const Token&) = default;
};

double protected_div(double x, double y);
double protected_log(double x);
double protected_sqrt(double x);

/// Immutable expression tree stored in prefix order. Copies are deep and
/// share nothing, which is what offspring generation relies on.
class Expression {
 public:
  /// Validates arity, constant positivity and the depth cap; throws
  /// std::invalid_argument on a malformed token sequence.
  explicit Expression(std::vector<Token> prefix);

  static Expression terminal(Op op, double value = 0.0);
  static Expression constant(double value) { return terminal(Op::Const, value); }

  std::span<const Token> tokens() const { return prefix_; }
  std::size_t size() const { return prefix_.size(); }
  const Token& root() const { return prefix_.front(); }

  /// A lone leaf has depth 1.
  std::size_t depth() const;
  /// Depth of the node at prefix position pos, root being 1.
  std::size_t depth_at(std::size_t pos) const;
  /// One past the last token of the subtree rooted at pos.
  std::size_t subtree_end(std::size_t pos) const;

  Expression replace_subtree(std::size_t pos, const Expression& donor) const;

  double evaluate(const NodeContext& ctx) const;

  /// S-expression form, e.g. (add Q (mul (k 2) Nc)). Constants are printed
  /// in shortest round-trip form so parse(to_string()) is exact.
  std::string to_string() const;
  static Expression parse(std::string_view text);

  friend bool operator==(const Expression&, const Expression&) = default;

 private:
  std::vector<Token> prefix_;
};

inline double evaluate(const Expression& e, const NodeContext& ctx) { return e.evaluate(ctx); }

/// Q + c * sqrt((2 * log(N_parent)) / N_child)
Expression uct_seed(double c);

/// Closed-form UCT score, kept separate from the tree evaluator.
double uct_score(const NodeContext& ctx, double c);

/// Grow-method tree: below max_depth each node is a function with
/// probability 0.5; terminals and functions are drawn uniformly.
Expression random_subtree(std::size_t max_depth, Rng& rng);

/// Mutation point: an internal node with probability 0.9 (uniform among
/// internal nodes), otherwise a uniform leaf. Trees without internal nodes
/// always yield a leaf.
std::size_t choose_mutation_point(const Expression& e, Rng& rng);

/// Subtree mutation. The result never exceeds max_depth.
Expression mutate(const Expression& e, Rng& rng, std::size_t max_depth = kMaxExpressionDepth);

}  // namespace evouct

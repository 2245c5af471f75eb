#pragma once

// Monte Carlo Tree Search over a small environment contract. The tree is
// stored in an arena so copying a whole tree is one vector copy.

#include <bit>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evouct/expr.hpp"
#include "evouct/rng.hpp"

namespace evouct::mcts {

template <class E>
concept Environment = requires(E& env, const E& cenv, const typename E::State& s,
                               std::size_t action, Rng& rng) {
  { cenv.initial_state() } -> std::convertible_to<typename E::State>;
  { cenv.action_count(s) } -> std::convertible_to<std::size_t>;
  { cenv.apply(s, action) } -> std::convertible_to<typename E::State>;
  { cenv.is_terminal(s) } -> std::convertible_to<bool>;
  { cenv.centre(s) } -> std::convertible_to<double>;
  { env.sample_reward(s, rng) } -> std::convertible_to<double>;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

template <class State>
struct SearchNode {
  State state{};
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  std::vector<std::size_t> untried_actions;
  std::uint64_t visits = 0;
  double total_reward = 0.0;
  std::uint32_t depth = 0;
  std::uint64_t created_at = 0;  // iteration that expanded this node

  double mean() const { return visits == 0 ? 0.0 : total_reward / static_cast<double>(visits); }
  bool expandable() const { return !untried_actions.empty(); }
  bool terminal() const { return untried_actions.empty() && children.empty(); }

  friend bool operator==(const SearchNode&, const SearchNode&) = default;
};

template <class State>
class SearchTree {
 public:
  using Node = SearchNode<State>;

  SearchTree(State root_state, std::size_t action_count) {
    Node root;
    root.state = std::move(root_state);
    root.untried_actions = all_actions(action_count);
    nodes_.push_back(std::move(root));
  }

  template <Environment E>
  static SearchTree fresh(const E& env) {
    auto s = env.initial_state();
    const std::size_t n = env.action_count(s);
    return SearchTree(std::move(s), n);
  }

  static constexpr NodeId root() { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  Node& node(NodeId id) { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }

  NodeId add_child(NodeId parent, State state, std::size_t action_count,
                   std::uint64_t created_at) {
    Node child;
    child.state = std::move(state);
    child.parent = parent;
    child.untried_actions = all_actions(action_count);
    child.depth = nodes_.at(parent).depth + 1;
    child.created_at = created_at;
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(child));
    nodes_[parent].children.push_back(id);
    return id;
  }

  /// FNV-1a over every statistic and link; equal trees hash equal.
  std::uint64_t structural_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    };
    for (const Node& n : nodes_) {
      mix(n.parent);
      mix(n.visits);
      mix(std::bit_cast<std::uint64_t>(n.total_reward));
      mix(n.children.size());
      for (NodeId c : n.children) mix(c);
      mix(n.untried_actions.size());
      for (std::size_t a : n.untried_actions) mix(a);
    }
    return h;
  }

  friend bool operator==(const SearchTree&, const SearchTree&) = default;

 private:
  static std::vector<std::size_t> all_actions(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }

  std::vector<Node> nodes_;
};

/// Scores a child from its NodeContext. Either closed-form UCT or an
/// evolved Expression; any deterministic callable is accepted.
class SelectionPolicy {
 public:
  using ScoreFn = std::function<double(const NodeContext&)>;

  SelectionPolicy(ScoreFn fn, std::string label) : fn_(std::move(fn)), label_(std::move(label)) {}

  static SelectionPolicy uct(double c) {
    return SelectionPolicy([c](const NodeContext& ctx) { return uct_score(ctx, c); },
                           "uct:" + std::to_string(c));
  }

  static SelectionPolicy expression(Expression e) {
    std::string label = e.to_string();
    return SelectionPolicy(
        [e = std::move(e)](const NodeContext& ctx) { return e.evaluate(ctx); }, std::move(label));
  }

  double operator()(const NodeContext& ctx) const { return fn_(ctx); }
  const std::string& label() const { return label_; }

 private:
  ScoreFn fn_;
  std::string label_;
};

/// Index of the maximum, ties broken uniformly. Draws from rng only when
/// more than one candidate shares the maximum.
template <class Scores>
std::size_t argmax_random_tie(const Scores& scores, Rng& rng) {
  std::vector<std::size_t> best;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > top) {
      top = scores[i];
      best.assign(1, i);
    } else if (scores[i] == top) {
      best.push_back(i);
    }
  }
  if (best.empty()) best.push_back(0);  // every score was -inf or NaN
  return best.size() == 1 ? best.front() : best[pick_index(rng, best.size())];
}

/// Descends from the root while the current node is fully expanded and has
/// children, moving to the argmax-scored child. Returns the first node that
/// is expandable or terminal.
template <class State>
NodeId select(const SearchTree<State>& tree, const SelectionPolicy& policy, Rng& rng) {
  NodeId current = tree.root();
  std::vector<double> scores;
  for (;;) {
    const auto& node = tree.node(current);
    if (node.expandable() || node.children.empty()) return current;
    scores.clear();
    for (NodeId c : node.children) {
      const auto& child = tree.node(c);
      scores.push_back(policy(NodeContext{child.mean(), static_cast<double>(node.visits),
                                          static_cast<double>(child.visits)}));
    }
    current = node.children[argmax_random_tie(scores, rng)];
  }
}

/// Adds the child reached by a uniformly chosen untried action. Throws
/// std::logic_error if the node has no untried action.
template <Environment E>
NodeId expand(SearchTree<typename E::State>& tree, NodeId id, const E& env, Rng& rng,
              std::uint64_t iteration = 0) {
  auto& untried = tree.node(id).untried_actions;
  if (untried.empty()) throw std::logic_error("expand called on a terminal or fully expanded node");
  const std::size_t pick = pick_index(rng, untried.size());
  const std::size_t action = untried[pick];
  untried.erase(untried.begin() + static_cast<std::ptrdiff_t>(pick));
  auto state = env.apply(tree.node(id).state, action);
  const std::size_t n = env.action_count(state);
  return tree.add_child(id, std::move(state), n, iteration);
}

/// Uniform random playout to a terminal state; one reward draw.
template <Environment E>
double rollout(typename E::State state, E& env, Rng& rng) {
  while (!env.is_terminal(state)) {
    state = env.apply(state, pick_index(rng, env.action_count(state)));
  }
  return env.sample_reward(state, rng);
}

template <class State>
void backpropagate(SearchTree<State>& tree, NodeId leaf, double reward) {
  for (NodeId id = leaf; id != kNoNode; id = tree.node(id).parent) {
    auto& node = tree.node(id);
    node.visits += 1;
    node.total_reward += reward;
  }
}

struct IterationResult {
  NodeId selected = kNoNode;
  std::optional<NodeId> expanded;
  double reward = 0.0;
};

/// select, expand unless terminal, roll out, backpropagate.
template <Environment E>
IterationResult run_iteration(SearchTree<typename E::State>& tree, const SelectionPolicy& policy,
                              E& env, Rng& rng, std::uint64_t iteration = 0) {
  IterationResult result;
  NodeId leaf = select(tree, policy, rng);
  result.selected = leaf;
  if (tree.node(leaf).expandable()) {
    leaf = expand(tree, leaf, env, rng, iteration);
    result.expanded = leaf;
  }
  result.reward = rollout(tree.node(leaf).state, env, rng);
  backpropagate(tree, leaf, result.reward);
  return result;
}

struct ExpansionRecord {
  std::uint64_t iteration = 0;
  double centre = 0.0;
  NodeId node = kNoNode;

  friend bool operator==(const ExpansionRecord&, const ExpansionRecord&) = default;
};

using ExpansionLog = std::vector<ExpansionRecord>;

template <class State>
struct SearchResult {
  SearchTree<State> tree;
  ExpansionLog log;
};

/// Runs `iterations` iterations from a fresh root, logging each expansion.
template <Environment E>
SearchResult<typename E::State> run_search(E& env, const SelectionPolicy& policy,
                                           std::uint64_t iterations, Rng& rng) {
  if (iterations < 1) throw std::invalid_argument("run_search needs at least one iteration");
  SearchResult<typename E::State> result{SearchTree<typename E::State>::fresh(env), {}};
  result.log.reserve(iterations);
  for (std::uint64_t i = 0; i < iterations; ++i) {
    const auto step = run_iteration(result.tree, policy, env, rng, i);
    if (step.expanded) {
      result.log.push_back({i, env.centre(result.tree.node(*step.expanded).state), *step.expanded});
    }
  }
  return result;
}

/// Child of the root with the highest mean reward, ties broken uniformly.
/// Throws std::logic_error when no child has been visited.
template <class State>
NodeId best_child(const SearchTree<State>& tree, Rng& rng) {
  const auto& root = tree.node(tree.root());
  std::vector<NodeId> visited;
  std::vector<double> values;
  for (NodeId c : root.children) {
    if (tree.node(c).visits == 0) continue;
    visited.push_back(c);
    values.push_back(tree.node(c).mean());
  }
  if (visited.empty()) throw std::logic_error("best_child: root has no visited children");
  return visited[argmax_random_tie(values, rng)];
}

}  // namespace evouct::mcts

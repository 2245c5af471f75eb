#pragma once

// Semantic-inspired (1,lambda) evolution strategy that evolves the MCTS
// selection formula online, starting from UCT.
//
// Fitness of an expression is the mean reward of `sims_per_eval` MCTS
// iterations run with that expression on a private copy of the base tree.
// The per-iteration rewards form the expression's semantics. Offspring
// with the highest fitness win; ties are broken by semantic similarity to
// the parent (closest to alpha among those with alpha < SSD < beta), and
// uniformly at random when no tied offspring is similar.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evouct/expr.hpp"
#include "evouct/mcts.hpp"
#include "evouct/rng.hpp"

namespace evouct::siea {

struct Semantics {
  std::vector<double> values;

  friend bool operator==(const Semantics&, const Semantics&) = default;
};

struct Individual {
  Expression expr;
  double fitness = 0.0;
  Semantics semantics;

  /// The seed parent is never evaluated; only evaluated individuals carry a
  /// fitness and semantics.
  bool evaluated() const { return !semantics.values.empty(); }
};

struct EvolutionConfig {
  std::size_t mu = 1;
  std::size_t lambda = 4;
  std::size_t generations = 20;
  std::size_t sims_per_eval = 30;
  double alpha = 5.0;
  double beta = 10.0;
  std::size_t max_depth = kMaxExpressionDepth;
  double seed_constant = std::numbers::sqrt2;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  std::uint64_t evaluation_budget() const { return generations * lambda * sims_per_eval; }
};

/// Mean absolute difference. Throws std::invalid_argument on length mismatch.
double ssd(const Semantics& p, const Semantics& q);

/// alpha < ssd(p, q) < beta
bool ssi(const Semantics& p, const Semantics& q, double alpha, double beta);

enum class SelectionBranch { UniqueBest, Semantic, Random };
std::string_view branch_name(SelectionBranch b);

struct ParentChoice {
  std::size_t index = 0;
  SelectionBranch branch = SelectionBranch::UniqueBest;
  /// Distance of each offspring to the parent, computed only for offspring
  /// tied at the best fitness and only when the parent has semantics.
  std::vector<std::optional<double>> ssd_to_parent;
};

/// Picks the next parent from the offspring (comma selection).
ParentChoice select_parent(std::span<const Individual> offspring, const Individual& parent,
                           double alpha, double beta, Rng& rng);

struct OffspringRecord {
  std::string expr;
  double fitness = 0.0;
  std::optional<double> ssd_to_parent;
};

struct GenerationRecord {
  std::size_t generation = 0;
  std::string parent_expr;
  std::optional<double> parent_fitness;
  std::vector<OffspringRecord> offspring;
  std::size_t selected_index = 0;
  SelectionBranch branch = SelectionBranch::UniqueBest;
};

nlohmann::json to_json(const GenerationRecord& record);

template <mcts::Environment E>
Individual evaluate_individual(const Expression& expr,
                               const mcts::SearchTree<typename E::State>& base_tree, E& env,
                               std::size_t sims, Rng& rng) {
  auto tree = base_tree;
  const auto policy = mcts::SelectionPolicy::expression(expr);
  Individual out{expr, 0.0, {}};
  out.semantics.values.reserve(sims);
  double sum = 0.0;
  for (std::size_t i = 0; i < sims; ++i) {
    const double r = mcts::run_iteration(tree, policy, env, rng, i).reward;
    out.semantics.values.push_back(r);
    sum += r;
  }
  out.fitness = sims == 0 ? 0.0 : sum / static_cast<double>(sims);
  return out;
}

struct EvolutionResult {
  Individual best;
  Individual final_parent;
  std::vector<GenerationRecord> history;
};

template <mcts::Environment E>
EvolutionResult evolve(E& env, const EvolutionConfig& config, Rng& rng) {
  config.validate();
  const auto base_tree = mcts::SearchTree<typename E::State>::fresh(env);

  Individual parent{uct_seed(config.seed_constant), 0.0, {}};
  Individual best = parent;
  std::vector<GenerationRecord> history;
  history.reserve(config.generations);

  for (std::size_t g = 1; g <= config.generations; ++g) {
    std::vector<Individual> offspring;
    offspring.reserve(config.lambda);
    for (std::size_t k = 0; k < config.lambda; ++k) {
      auto child = mutate(parent.expr, rng, config.max_depth);
      offspring.push_back(evaluate_individual(child, base_tree, env, config.sims_per_eval, rng));
    }
    const auto choice = select_parent(offspring, parent, config.alpha, config.beta, rng);

    GenerationRecord record;
    record.generation = g;
    record.parent_expr = parent.expr.to_string();
    if (parent.evaluated()) record.parent_fitness = parent.fitness;
    for (std::size_t k = 0; k < offspring.size(); ++k) {
      record.offspring.push_back(
          {offspring[k].expr.to_string(), offspring[k].fitness, choice.ssd_to_parent[k]});
      if (!best.evaluated() || offspring[k].fitness >= best.fitness) best = offspring[k];
    }
    record.selected_index = choice.index;
    record.branch = choice.branch;
    history.push_back(std::move(record));

    parent = std::move(offspring[choice.index]);
  }
  return {std::move(best), std::move(parent), std::move(history)};
}

template <class State>
struct SieaSearchResult {
  mcts::SearchTree<State> tree;
  mcts::ExpansionLog log;
  Individual best;
  Individual final_parent;
  std::vector<GenerationRecord> history;
};

inline constexpr std::uint64_t kDefaultPostIterations = 2600;

/// Evolves a formula, then builds the reported tree from a fresh root with
/// the best-of-run expression for `post_iterations` iterations.
template <mcts::Environment E>
SieaSearchResult<typename E::State> run_siea_search(E& env, const EvolutionConfig& config,
                                                    std::uint64_t post_iterations, Rng& rng) {
  auto evolved = evolve(env, config, rng);
  auto search =
      mcts::run_search(env, mcts::SelectionPolicy::expression(evolved.best.expr), post_iterations, rng);
  return {std::move(search.tree), std::move(search.log), std::move(evolved.best),
          std::move(evolved.final_parent), std::move(evolved.history)};
}

}  // namespace evouct::siea

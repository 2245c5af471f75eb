#include "evouct/siea.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace evouct::siea {

void EvolutionConfig::validate() const {
  if (mu != 1) throw std::invalid_argument("only mu = 1 is supported");
  if (lambda < 1) throw std::invalid_argument("lambda must be at least 1");
  if (sims_per_eval < 1) throw std::invalid_argument("sims_per_eval must be at least 1");
  if (!(alpha < beta)) throw std::invalid_argument("alpha must be below beta");
  if (max_depth < 1 || max_depth > kMaxExpressionDepth) {
    throw std::invalid_argument("max_depth must lie in [1, 8]");
  }
  if (!(seed_constant > 0.0)) throw std::invalid_argument("seed constant must be positive");
}

double ssd(const Semantics& p, const Semantics& q) {
  if (p.values.size() != q.values.size()) {
    throw std::invalid_argument("ssd: semantics lengths differ (" +
                                std::to_string(p.values.size()) + " vs " +
                                std::to_string(q.values.size()) + ")");
  }
  if (p.values.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) sum += std::abs(p.values[i] - q.values[i]);
  return sum / static_cast<double>(p.values.size());
}

bool ssi(const Semantics& p, const Semantics& q, double alpha, double beta) {
  const double d = ssd(p, q);
  return alpha < d && d < beta;
}

std::string_view branch_name(SelectionBranch b) {
  switch (b) {
    case SelectionBranch::UniqueBest: return "unique_best";
    case SelectionBranch::Semantic: return "semantic";
    case SelectionBranch::Random: return "random";
  }
  return "?";
}

ParentChoice select_parent(std::span<const Individual> offspring, const Individual& parent,
                           double alpha, double beta, Rng& rng) {
  if (offspring.empty()) throw std::invalid_argument("select_parent: no offspring");
  ParentChoice choice;
  choice.ssd_to_parent.assign(offspring.size(), std::nullopt);

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& o : offspring) top = std::max(top, o.fitness);
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < offspring.size(); ++i) {
    if (offspring[i].fitness == top) tied.push_back(i);
  }
  if (tied.size() == 1) {
    choice.index = tied.front();
    choice.branch = SelectionBranch::UniqueBest;
    return choice;
  }

  // Similar offspring, ranked by closeness of their distance to alpha.
  std::vector<std::size_t> closest;
  double closest_gap = std::numeric_limits<double>::infinity();
  if (parent.evaluated()) {
    for (std::size_t i : tied) {
      const double d = ssd(offspring[i].semantics, parent.semantics);
      choice.ssd_to_parent[i] = d;
      if (!(alpha < d && d < beta)) continue;
      const double gap = std::abs(d - alpha);
      if (gap < closest_gap) {
        closest_gap = gap;
        closest.assign(1, i);
      } else if (gap == closest_gap) {
        closest.push_back(i);
      }
    }
  }
  if (!closest.empty()) {
    choice.index = closest.size() == 1 ? closest.front() : closest[pick_index(rng, closest.size())];
    choice.branch = SelectionBranch::Semantic;
    return choice;
  }
  choice.index = tied[pick_index(rng, tied.size())];
  choice.branch = SelectionBranch::Random;
  return choice;
}

nlohmann::json to_json(const GenerationRecord& record) {
  nlohmann::json offspring = nlohmann::json::array();
  for (const auto& o : record.offspring) {
    offspring.push_back({{"expr", o.expr},
                         {"fitness", o.fitness},
                         {"ssd_to_parent", o.ssd_to_parent ? nlohmann::json(*o.ssd_to_parent)
                                                           : nlohmann::json(nullptr)}});
  }
  return {
      {"generation", record.generation},
      {"parent_expr", record.parent_expr},
      {"parent_fitness",
       record.parent_fitness ? nlohmann::json(*record.parent_fitness) : nlohmann::json(nullptr)},
      {"offspring", std::move(offspring)},
      {"selected_index", record.selected_index},
      {"selection_branch", std::string(branch_name(record.branch))},
  };
}

}  // namespace evouct::siea

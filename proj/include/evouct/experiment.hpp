#pragma once

// Batch runner for the function x agent grid: seeding, execution across a
// bounded worker pool, histogram aggregation, and file export.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "evouct/analysis.hpp"
#include "evouct/bench.hpp"
#include "evouct/mcts.hpp"
#include "evouct/siea.hpp"

namespace evouct::experiment {

/// Exploration constants used for the UCT agents.
inline constexpr std::array<double, 5> kPaperConstants = kConstantSet;

struct AgentSpec {
  enum class Kind { Uct, Siea };
  Kind kind = Kind::Uct;
  double c = 0.0;  // uct only

  /// Stable identifier, e.g. "uct_c0.5" or "siea". Feeds seeding and file names.
  std::string id() const;
  std::string policy_name() const { return kind == Kind::Uct ? "uct" : "siea"; }
  std::string c_or_evolved() const;

  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// Parses "uct:<c>" or "siea". A constant within 5e-4 of one of the
/// standard constants is snapped to it, so "uct:1.4142" means sqrt(2).
AgentSpec parse_agent(std::string_view text);
std::vector<AgentSpec> default_agents();

enum class HistogramWeight { Expansions, Visits };

struct ExperimentConfig {
  std::vector<bench::TestFunction> functions = bench::all_functions();
  std::vector<AgentSpec> agents = default_agents();
  std::uint64_t iterations = 5000;
  std::size_t runs = 30;
  std::size_t bins = analysis::kDefaultBins;
  std::uint64_t base_seed = 0;
  siea::EvolutionConfig ea;
  std::filesystem::path output_dir = "out";
  std::size_t workers = 1;
  bool allow_any_c = false;
  HistogramWeight weight = HistogramWeight::Expansions;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Iterations left for the reported tree after evolution.
  std::uint64_t siea_post_iterations() const { return iterations - ea.evaluation_budget(); }
};

/// Seed of run r for (function, agent): SplitMix64 chained over base seed,
/// function index, FNV-1a of the agent id, and run index.
std::uint64_t derive_run_seed(std::uint64_t base_seed, bench::TestFunction f,
                              const AgentSpec& agent, std::size_t run);

std::string config_id(bench::TestFunction f, const AgentSpec& agent);

struct RunOutcome {
  bench::TestFunction function{};
  AgentSpec agent;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::uint64_t total_iterations = 0;  // iterations that built the reported tree
  mcts::ExpansionLog log;
  std::vector<double> expansion_visits;  // final visit count of each logged node
  std::uint64_t reward_draws = 0;
  double best_child_centre = 0.0;
  std::optional<siea::Individual> evolved;
  std::vector<siea::GenerationRecord> history;
};

/// One independent search, fully determined by its derived seed.
RunOutcome run_single(const ExperimentConfig& cfg, bench::TestFunction f, const AgentSpec& agent,
                      std::size_t run);

analysis::HistogramReport run_histogram(const ExperimentConfig& cfg, const RunOutcome& outcome);

/// JSON-lines record of one run: a header line, one line per generation
/// (siea only), and one line holding the expansion log.
void write_run_log(std::ostream& out, const RunOutcome& outcome);

struct CellResult {
  bench::TestFunction function{};
  AgentSpec agent;
  analysis::HistogramReport report;
  std::vector<RunOutcome> runs;
};

/// Executes every (function, agent, run) job and aggregates per cell. Pure
/// computation; nothing is written.
std::vector<CellResult> run_grid(const ExperimentConfig& cfg, std::ostream* status = nullptr);

/// run_grid plus export of CSV, JSON, plot data and per-run logs under
/// cfg.output_dir. Throws std::runtime_error naming the file on I/O failure.
std::vector<CellResult> run_experiment(const ExperimentConfig& cfg, std::ostream* status = nullptr);

}  // namespace evouct::experiment

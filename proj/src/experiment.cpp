#include "evouct/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "evouct/format.hpp"

namespace evouct::experiment {

namespace {

constexpr double kSnapTolerance = 5e-4;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_paper_constant(double c) {
  for (double k : kPaperConstants) {
    if (c == k) return true;
  }
  return false;
}

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string AgentSpec::id() const {
  return kind == Kind::Siea ? std::string("siea") : "uct_c" + format_number(c);
}

std::string AgentSpec::c_or_evolved() const {
  return kind == Kind::Siea ? std::string("evolved") : format_number(c);
}

AgentSpec parse_agent(std::string_view text) {
  if (text == "siea") return {AgentSpec::Kind::Siea, 0.0};
  if (!text.starts_with("uct:")) {
    throw std::invalid_argument("agent '" + std::string(text) + "' is not 'siea' or 'uct:<c>'");
  }
  const std::string number(text.substr(4));
  std::size_t used = 0;
  double c = 0.0;
  try {
    c = std::stod(number, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != number.size() || number.empty() || !(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("agent '" + std::string(text) + "' needs a positive constant");
  }
  for (double k : kPaperConstants) {
    if (std::abs(c - k) < kSnapTolerance) c = k;
  }
  return {AgentSpec::Kind::Uct, c};
}

std::vector<AgentSpec> default_agents() {
  std::vector<AgentSpec> out;
  for (double c : kPaperConstants) out.push_back({AgentSpec::Kind::Uct, c});
  out.push_back({AgentSpec::Kind::Siea, 0.0});
  return out;
}

void ExperimentConfig::validate() const {
  if (functions.empty()) throw std::invalid_argument("functions: at least one is required");
  if (agents.empty()) throw std::invalid_argument("agents: at least one is required");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  bool has_siea = false;
  for (const auto& a : agents) {
    if (a.kind == AgentSpec::Kind::Siea) {
      has_siea = true;
    } else if (!allow_any_c && !is_paper_constant(a.c)) {
      throw std::invalid_argument("agent " + a.id() +
                                  ": c must be one of 0.5, 1, sqrt2, 2, 3 (pass --allow-any-c)");
    }
  }
  if (has_siea) {
    ea.validate();
    if (ea.evaluation_budget() >= iterations) {
      throw std::invalid_argument("iterations (" + std::to_string(iterations) +
                                  ") must exceed the EA evaluation budget (" +
                                  std::to_string(ea.evaluation_budget()) + ")");
    }
  }
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, bench::TestFunction f,
                              const AgentSpec& agent, std::size_t run) {
  std::uint64_t s = splitmix64(base_seed);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(f) + 1));
  s = splitmix64(s ^ fnv1a(agent.id()));
  return splitmix64(s ^ static_cast<std::uint64_t>(run));
}

std::string config_id(bench::TestFunction f, const AgentSpec& agent) {
  return std::string(bench::function_id(f)) + "_" + agent.id();
}

RunOutcome run_single(const ExperimentConfig& cfg, bench::TestFunction f, const AgentSpec& agent,
                      std::size_t run) {
  RunOutcome out;
  out.function = f;
  out.agent = agent;
  out.run = run;
  out.seed = derive_run_seed(cfg.base_seed, f, agent, run);
  Rng rng(out.seed);
  bench::FunctionEnvironment env(f);

  auto finish = [&](const auto& tree) {
    out.expansion_visits.reserve(out.log.size());
    for (const auto& rec : out.log) {
      out.expansion_visits.push_back(static_cast<double>(tree.node(rec.node).visits));
    }
    out.best_child_centre = env.centre(tree.node(mcts::best_child(tree, rng)).state);
  };

  if (agent.kind == AgentSpec::Kind::Uct) {
    auto result = mcts::run_search(env, mcts::SelectionPolicy::uct(agent.c), cfg.iterations, rng);
    out.total_iterations = cfg.iterations;
    out.log = std::move(result.log);
    finish(result.tree);
  } else {
    auto result = siea::run_siea_search(env, cfg.ea, cfg.siea_post_iterations(), rng);
    out.total_iterations = cfg.siea_post_iterations();
    out.log = std::move(result.log);
    out.evolved = std::move(result.best);
    out.history = std::move(result.history);
    finish(result.tree);
  }
  out.reward_draws = env.reward_draws();
  return out;
}

analysis::HistogramReport run_histogram(const ExperimentConfig& cfg, const RunOutcome& outcome) {
  const std::span<const double> weights =
      cfg.weight == HistogramWeight::Visits ? std::span<const double>(outcome.expansion_visits)
                                            : std::span<const double>();
  return analysis::histogram(outcome.log, outcome.total_iterations, cfg.bins,
                             config_id(outcome.function, outcome.agent), weights);
}

void write_run_log(std::ostream& out, const RunOutcome& outcome) {
  nlohmann::json header = {
      {"type", "run"},
      {"config_id", config_id(outcome.function, outcome.agent)},
      {"function", bench::function_id(outcome.function)},
      {"agent", outcome.agent.id()},
      {"run", outcome.run},
      {"seed", outcome.seed},
      {"iterations", outcome.total_iterations},
      {"reward_draws", outcome.reward_draws},
      {"expansions", outcome.log.size()},
      {"best_child_centre", outcome.best_child_centre},
  };
  if (outcome.evolved) {
    header["best_expr"] = outcome.evolved->expr.to_string();
    header["best_fitness"] = outcome.evolved->evaluated()
                                 ? nlohmann::json(outcome.evolved->fitness)
                                 : nlohmann::json(nullptr);
  }
  out << header.dump() << '\n';
  for (const auto& record : outcome.history) {
    auto line = siea::to_json(record);
    line["type"] = "generation";
    out << line.dump() << '\n';
  }
  nlohmann::json iterations = nlohmann::json::array();
  nlohmann::json centres = nlohmann::json::array();
  for (const auto& rec : outcome.log) {
    iterations.push_back(rec.iteration);
    centres.push_back(rec.centre);
  }
  out << nlohmann::json{{"type", "expansions"}, {"iteration", std::move(iterations)},
                        {"centre", std::move(centres)}}
             .dump()
      << '\n';
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg, std::ostream* status) {
  cfg.validate();
  struct Job {
    std::size_t cell;
    std::size_t run;
  };
  std::vector<CellResult> cells;
  std::vector<Job> jobs;
  for (auto f : cfg.functions) {
    for (const auto& agent : cfg.agents) {
      cells.push_back({f, agent, {}, std::vector<RunOutcome>(cfg.runs)});
      for (std::size_t r = 0; r < cfg.runs; ++r) jobs.push_back({cells.size() - 1, r});
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex status_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      auto& cell = cells[jobs[j].cell];
      try {
        cell.runs[jobs[j].run] = run_single(cfg, cell.function, cell.agent, jobs[j].run);
      } catch (...) {
        std::lock_guard lock(status_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
      const std::size_t finished = ++done;
      if (status) {
        std::lock_guard lock(status_mutex);
        *status << "[" << finished << "/" << jobs.size() << "] "
                << config_id(cell.function, cell.agent) << " run " << jobs[j].run << '\n';
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t n = std::min(cfg.workers, jobs.size());
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& cell : cells) {
    std::vector<analysis::HistogramReport> reports;
    reports.reserve(cell.runs.size());
    for (const auto& run : cell.runs) reports.push_back(run_histogram(cfg, run));
    cell.report = analysis::aggregate(reports);
  }
  return cells;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& cfg, std::ostream* status) {
  cfg.validate();
  const auto runs_dir = cfg.output_dir / "runs";
  std::error_code ec;
  std::filesystem::create_directories(runs_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create '" + runs_dir.string() + "': " + ec.message());
  }

  auto cells = run_grid(cfg, status);
  for (const auto& cell : cells) {
    const auto id = config_id(cell.function, cell.agent);
    const analysis::ExportLabels labels{std::string(bench::function_id(cell.function)),
                                        cell.agent.policy_name(), cell.agent.c_or_evolved(),
                                        cfg.base_seed};
    write_file(cfg.output_dir / (id + ".csv"),
               [&](std::ostream& out) { analysis::write_csv(out, cell.report, labels); });
    write_file(cfg.output_dir / (id + ".json"), [&](std::ostream& out) {
      out << analysis::to_json(cell.report, labels).dump(2) << '\n';
    });
    write_file(cfg.output_dir / (id + ".dat"),
               [&](std::ostream& out) { analysis::write_plot_data(out, cell.report); });
    for (const auto& run : cell.runs) {
      write_file(runs_dir / (id + "_run" + std::to_string(run.run) + ".jsonl"),
                 [&](std::ostream& out) { write_run_log(out, run); });
    }
    if (status) *status << "wrote " << id << '\n';
  }
  return cells;
}

}  // namespace evouct::experiment

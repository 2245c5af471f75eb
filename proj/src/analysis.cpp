#include "evouct/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "evouct/format.hpp"

namespace evouct::analysis {

std::vector<double> HistogramReport::totals() const {
  std::vector<double> out(bins, 0.0);
  for (const auto& counts : tertile_counts) {
    for (std::size_t i = 0; i < bins; ++i) out[i] += counts[i];
  }
  return out;
}

double HistogramReport::total_mass() const {
  const auto t = totals();
  return std::accumulate(t.begin(), t.end(), 0.0);
}

std::size_t tertile_of(std::uint64_t iteration, std::uint64_t total_iterations) {
  if (iteration >= total_iterations) {
    throw std::out_of_range("iteration " + std::to_string(iteration) + " outside budget " +
                            std::to_string(total_iterations));
  }
  const std::uint64_t first = total_iterations / 3;
  const std::uint64_t second = 2 * total_iterations / 3;
  if (iteration < first) return 0;
  if (iteration < second) return 1;
  return 2;
}

std::array<std::vector<double>, kTertiles> tertile_split(const mcts::ExpansionLog& log,
                                                        std::uint64_t total_iterations) {
  std::array<std::vector<double>, kTertiles> out;
  for (const auto& rec : log) out[tertile_of(rec.iteration, total_iterations)].push_back(rec.centre);
  return out;
}

std::size_t bin_index(double x, std::size_t bins) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range("bin_index: value outside [0,1]");
  const auto i = static_cast<std::size_t>(x * static_cast<double>(bins));
  return std::min(i, bins - 1);
}

std::vector<std::uint64_t> bin_centres(std::span<const double> centres, std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  std::vector<std::uint64_t> counts(bins, 0);
  for (double x : centres) ++counts[bin_index(x, bins)];
  return counts;
}

std::vector<double> uniform_edges(std::size_t bins) {
  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    edges[i] = static_cast<double>(i) / static_cast<double>(bins);
  }
  return edges;
}

HistogramReport histogram(const mcts::ExpansionLog& log, std::uint64_t total_iterations,
                          std::size_t bins, std::string config_id,
                          std::span<const double> weights) {
  if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  if (!weights.empty() && weights.size() != log.size()) {
    throw std::invalid_argument("histogram: one weight per log entry required");
  }
  HistogramReport report;
  report.bins = bins;
  report.edges = uniform_edges(bins);
  report.runs = 1;
  report.config_id = std::move(config_id);
  for (auto& counts : report.tertile_counts) counts.assign(bins, 0.0);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto t = tertile_of(log[i].iteration, total_iterations);
    report.tertile_counts[t][bin_index(log[i].centre, bins)] += weights.empty() ? 1.0 : weights[i];
  }
  return report;
}

HistogramReport aggregate(std::span<const HistogramReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  const auto& first = reports.front();
  HistogramReport out;
  out.bins = first.bins;
  out.edges = first.edges;
  out.config_id = first.config_id;
  for (auto& counts : out.tertile_counts) counts.assign(out.bins, 0.0);

  std::size_t runs = 0;
  for (const auto& r : reports) {
    if (r.bins != first.bins || r.edges != first.edges || r.config_id != first.config_id) {
      throw std::invalid_argument("aggregate: mismatched bin configuration for '" + r.config_id +
                                  "'");
    }
    // Inputs may themselves be means; weight them by their run count.
    for (std::size_t t = 0; t < kTertiles; ++t) {
      for (std::size_t b = 0; b < out.bins; ++b) {
        out.tertile_counts[t][b] += r.tertile_counts[t][b] * static_cast<double>(r.runs);
      }
    }
    runs += r.runs;
  }
  for (auto& counts : out.tertile_counts) {
    for (double& c : counts) c /= static_cast<double>(runs);
  }
  out.runs = runs;
  return out;
}

double peak_mass(const HistogramReport& report, double centre, double radius,
                 std::optional<std::size_t> tertile) {
  if (tertile && *tertile >= kTertiles) throw std::out_of_range("tertile index must be 0, 1 or 2");
  const double lo = centre - radius;
  const double hi = centre + radius;
  double mass = 0.0;
  for (std::size_t b = 0; b < report.bins; ++b) {
    const double mid = 0.5 * (report.edges[b] + report.edges[b + 1]);
    if (mid < lo || mid > hi) continue;
    for (std::size_t t = 0; t < kTertiles; ++t) {
      if (!tertile || *tertile == t) mass += report.tertile_counts[t][b];
    }
  }
  return mass;
}

std::vector<Peak> find_peaks(const HistogramReport& report, double rel_threshold) {
  const auto totals = report.totals();
  const double top = totals.empty() ? 0.0 : *std::max_element(totals.begin(), totals.end());
  std::vector<Peak> peaks;
  if (top <= 0.0) return peaks;
  const double cut = rel_threshold * top;
  std::size_t b = 0;
  while (b < totals.size()) {
    if (totals[b] <= cut) {
      ++b;
      continue;
    }
    Peak peak{b, totals[b], 0.0};
    for (; b < totals.size() && totals[b] > cut; ++b) {
      if (totals[b] > peak.height) peak = {b, totals[b], 0.0};
    }
    peak.location = 0.5 * (report.edges[peak.bin] + report.edges[peak.bin + 1]);
    peaks.push_back(peak);
  }
  return peaks;
}

void write_csv(std::ostream& out, const HistogramReport& report, const ExportLabels& labels) {
  out << kCsvHeader << '\n';
  for (std::size_t t = 0; t < kTertiles; ++t) {
    for (std::size_t b = 0; b < report.bins; ++b) {
      out << report.config_id << ',' << labels.function << ',' << labels.policy << ','
          << labels.c_or_evolved << ',' << labels.run_seed << ',' << t << ',' << b << ','
          << format_number(report.edges[b]) << ',' << format_number(report.edges[b + 1]) << ','
          << format_number(report.tertile_counts[t][b]) << '\n';
    }
  }
}

nlohmann::json to_json(const HistogramReport& report, const ExportLabels& labels) {
  nlohmann::json tertiles = nlohmann::json::array();
  for (const auto& counts : report.tertile_counts) tertiles.push_back(counts);
  return {
      {"config_id", report.config_id},
      {"function", labels.function},
      {"policy", labels.policy},
      {"c_or_evolved", labels.c_or_evolved},
      {"run_seed", labels.run_seed},
      {"runs", report.runs},
      {"bins", report.bins},
      {"edges", report.edges},
      {"tertile_counts", std::move(tertiles)},
  };
}

void write_plot_data(std::ostream& out, const HistogramReport& report) {
  out << "# bin_mid tertile mean_count\n";
  for (std::size_t t = 0; t < kTertiles; ++t) {
    if (t > 0) out << '\n';
    for (std::size_t b = 0; b < report.bins; ++b) {
      const double mid = 0.5 * (report.edges[b] + report.edges[b + 1]);
      out << format_number(mid) << ' ' << t << ' ' << format_number(report.tertile_counts[t][b])
          << '\n';
    }
  }
}

}  // namespace evouct::analysis

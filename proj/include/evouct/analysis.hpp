#pragma once

// Node-location histograms split by iteration tertile, and their averages
// over independent runs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evouct/mcts.hpp"

namespace evouct::analysis {

inline constexpr std::size_t kTertiles = 3;
inline constexpr std::size_t kDefaultBins = 100;

struct HistogramReport {
  std::size_t bins = kDefaultBins;
  std::vector<double> edges;                                  // bins + 1 values, 0 .. 1
  std::array<std::vector<double>, kTertiles> tertile_counts;  // mean count per bin
  std::size_t runs = 1;
  std::string config_id;

  /// Sum over tertiles, per bin.
  std::vector<double> totals() const;
  double total_mass() const;
};

/// Tertile of an iteration index under budget T: boundaries at floor(T/3)
/// and floor(2T/3), so any remainder lands in the later tertiles.
std::size_t tertile_of(std::uint64_t iteration, std::uint64_t total_iterations);

/// Splits expansion centres by tertile. Throws std::out_of_range if an
/// entry's iteration index is not below total_iterations.
std::array<std::vector<double>, kTertiles> tertile_split(const mcts::ExpansionLog& log,
                                                        std::uint64_t total_iterations);

/// Bin of x in a uniform partition of [0,1]; x = 1 lands in the last bin.
std::size_t bin_index(double x, std::size_t bins);

std::vector<std::uint64_t> bin_centres(std::span<const double> centres, std::size_t bins);

std::vector<double> uniform_edges(std::size_t bins);

/// Single-run report. With `weights`, entry i contributes weights[i]
/// instead of 1 (visit-weighted view).
HistogramReport histogram(const mcts::ExpansionLog& log, std::uint64_t total_iterations,
                          std::size_t bins, std::string config_id,
                          std::span<const double> weights = {});

/// Per-bin, per-tertile mean over runs. Throws std::invalid_argument on an
/// empty input or mismatched bins/edges/config_id.
HistogramReport aggregate(std::span<const HistogramReport> reports);

/// Mean mass in bins whose midpoint lies within [centre - radius, centre + radius],
/// for one tertile or, when tertile is empty, all of them.
double peak_mass(const HistogramReport& report, double centre, double radius,
                 std::optional<std::size_t> tertile = std::nullopt);

/// A peak of the all-tertile histogram.
struct Peak {
  std::size_t bin = 0;
  double height = 0.0;
  double location = 0.0;  // bin midpoint
};

/// Peaks whose height exceeds rel_threshold times the global bin maximum.
/// A peak is the highest bin of a run of consecutive bins above the
/// threshold, so one hump counts once however noisy its top is.
std::vector<Peak> find_peaks(const HistogramReport& report, double rel_threshold);

/// Labels written alongside every CSV row.
struct ExportLabels {
  std::string function;
  std::string policy;
  std::string c_or_evolved;
  std::uint64_t run_seed = 0;
};

inline constexpr const char* kCsvHeader =
    "config_id,function,policy,c_or_evolved,run_seed,tertile,bin_index,bin_low,bin_high,mean_count";

/// Header plus one row per (tertile, bin).
void write_csv(std::ostream& out, const HistogramReport& report, const ExportLabels& labels);

nlohmann::json to_json(const HistogramReport& report, const ExportLabels& labels);

/// Three columns per line: bin_mid tertile mean_count; tertile blocks are
/// separated by blank lines.
void write_plot_data(std::ostream& out, const HistogramReport& report);

}  // namespace evouct::analysis

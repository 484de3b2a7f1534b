#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pelp/eventlog.hpp"
#include "pelp/neural.hpp"
#include "pelp/training.hpp"

namespace pelp {

/// Searchable ranges. Optimizer (SGD), loss (cross-entropy) and teacher
/// forcing are fixed and not part of the space.
struct SearchSpace {
  double min_learning_rate = HyperParams::kMinLearningRate;
  double max_learning_rate = HyperParams::kMaxLearningRate;
  std::size_t min_hidden = HyperParams::kMinHidden;
  std::size_t max_hidden = HyperParams::kMaxHidden;
  double min_dropout = HyperParams::kMinDropout;
  double max_dropout = HyperParams::kMaxDropout;
  std::size_t min_window = 1;
  std::size_t max_window = WindowSpec::kMaxTraces;

  /// Throws ConfigError when a range is empty or leaves the allowed bounds.
  void validate() const;
};

struct Trial {
  std::size_t index = 0;
  HyperParams hyper;
};

/// Axis value lists for grid search.
struct GridAxes {
  std::vector<double> learning_rates;
  std::vector<std::size_t> hidden_sizes;
  std::vector<double> dropouts;
  std::vector<WindowSpec> windows;
};

/// Cartesian product; the learning rate varies slowest, then hidden size,
/// dropout and window. Trial k gets seed master_seed + k. Throws
/// ConfigError for an empty axis or an out-of-range value.
std::vector<Trial> grid(const GridAxes& axes, std::uint64_t master_seed);

/// n independent draws: learning rate and dropout log-uniform, hidden size
/// and p, q uniform integers. Trial k is drawn from an rng seeded with
/// master_seed + k and trains with that seed.
std::vector<Trial> random_trials(const SearchSpace& space, std::size_t n, std::uint64_t master_seed);

struct TrialResult {
  std::size_t index = 0;
  HyperParams hyper;
  bool ok = false;
  double rmse = 0.0;
  double mae = 0.0;
  double best_loss = 0.0;
  std::size_t epochs = 0;
  std::string message;  // failure reason or prediction warning
};

/// Successful trials first, ordered by (rmse, mae, index); failed trials
/// after them by index.
std::vector<TrialResult> rank(std::vector<TrialResult> results);

/// pairs -> train -> roll_forward over |test| traces -> rmse/mae. Failures
/// (short log, non-finite training, no complete trace) come back with ok=false.
TrialResult run_trial(const Trial& trial, const EventLog& train, const EventLog& test, const TrainConfig& config);

struct SearchOptions {
  TrainConfig train;
  std::size_t threads = 1;
  /// Results CSV, appended after each finished trial. Trials already present
  /// in it are not rerun.
  std::optional<std::filesystem::path> report;
};

std::vector<TrialResult> run_search(const std::vector<Trial>& trials, const EventLog& train, const EventLog& test,
                                    const SearchOptions& options);

std::string results_csv_header();
std::string results_csv_row(const TrialResult& r);
/// Reads rows written by run_search; ignores a truncated last line.
std::vector<TrialResult> read_results_csv(const std::filesystem::path& path);

}  // namespace pelp

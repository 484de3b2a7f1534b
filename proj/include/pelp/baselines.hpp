#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pelp/dfg.hpp"
#include "pelp/eventlog.hpp"

namespace pelp {

/// Distinct training traces (sorted lexicographically) with their counts.
struct VariantDistribution {
  std::vector<Activities> variants;
  std::vector<std::size_t> counts;

  static VariantDistribution from_log(const EventLog& log);
  std::size_t total() const;
  std::vector<double> probabilities() const;
};

/// The modal variant repeated `horizon` times; ties go to the
/// lexicographically smallest variant.
EventLog highest_freq(const EventLog& train, std::size_t horizon);
/// Each trace drawn uniformly from the distinct variants.
EventLog random_pred(const EventLog& train, std::size_t horizon, std::uint64_t seed);
/// Each trace drawn with probability count / total.
EventLog weighted_prob(const EventLog& train, std::size_t horizon, std::uint64_t seed);

enum class BaselineMethod { HighestFreq, RandomPred, WeightedProb };
/// Accepts "highestfreq", "random", "weighted" (and the display names).
BaselineMethod parse_baseline(std::string_view name);
std::string display_name(BaselineMethod method);
bool is_stochastic(BaselineMethod method);

/// A predictor for a given run seed.
using Predictor = std::function<EventLog(std::uint64_t seed)>;
Predictor baseline_predictor(BaselineMethod method, const EventLog& train, std::size_t horizon);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

struct StochasticReport {
  MetricSummary rmse;
  MetricSummary mae;
  std::vector<LogDistance> runs;
  static constexpr std::string_view kStdEstimator = "sample (n-1)";
};

/// Scores `runs` predictions (run k uses seed + k) against the truth and
/// aggregates. Throws ConfigError for runs < 2.
StochasticReport evaluate_stochastic(const Predictor& predictor, const EventLog& truth, std::size_t runs,
                                     std::uint64_t seed);

/// Sample mean and standard deviation.
MetricSummary summarize(const std::vector<double>& values);

}  // namespace pelp

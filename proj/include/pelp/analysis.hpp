#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pelp/eventlog.hpp"

namespace pelp {

/// Frequency of one directly-follows pair inside a sliding window of traces.
struct DfSeries {
  std::string from;
  std::string to;
  std::size_t window = 0;
  std::size_t stride = 1;
  std::vector<double> values;  // value k covers traces [k*stride, k*stride + window)
};

/// Throws ConfigError when window is 0 or exceeds the log, or stride is 0.
DfSeries df_series(const EventLog& log, const std::string& from, const std::string& to, std::size_t window = 200,
                   std::size_t stride = 1);

struct Autocorrelation {
  std::vector<double> r;    // lags 0..max_lag
  bool degenerate = false;  // constant series: r is all ones by convention
};

/// r(k) is the Pearson correlation between v[0, n-k) and v[k, n). r(0) = 1
/// and an exactly periodic series gives r(period) = 1. A lag whose
/// overlapping segments have no variance gets r = 0. Throws ConfigError
/// unless max_lag < n.
Autocorrelation autocorrelation(std::span<const double> series, std::size_t max_lag);

struct PairSummary {
  std::string from;
  std::string to;
  double mean_abs_r = 0.0;  // over lags 1..max_lag
  bool degenerate = false;
  bool weak = false;        // mean |r| below the threshold
};

/// One summary per ordered activity pair of the log universe (row-major over
/// the sorted universe).
std::vector<PairSummary> autocorr_report(const EventLog& log, std::size_t window, std::size_t max_lag,
                                         double weak_threshold = 0.5);

/// CSV matrix of mean |r| ("degenerate" for zero-variance series).
std::string report_csv(const std::vector<PairSummary>& report, const std::vector<std::string>& universe);

}  // namespace pelp

#include "pelp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pelp/dfg.hpp"
#include "pelp/error.hpp"

namespace pelp {

namespace {

std::vector<std::uint64_t> pair_counts(const EventLog& log, const std::string& from, const std::string& to) {
  std::vector<std::uint64_t> counts(log.size(), 0);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& a = log[i].activities;
    for (std::size_t k = 1; k < a.size(); ++k) counts[i] += a[k - 1] == from && a[k] == to;
  }
  return counts;
}

std::vector<double> windowed(const std::vector<std::uint64_t>& counts, std::size_t window, std::size_t stride) {
  std::vector<std::uint64_t> prefix(counts.size() + 1, 0);
  for (std::size_t i = 0; i < counts.size(); ++i) prefix[i + 1] = prefix[i] + counts[i];
  std::vector<double> values;
  for (std::size_t k = 0; k + window <= counts.size(); k += stride) {
    values.push_back(static_cast<double>(prefix[k + window] - prefix[k]));
  }
  return values;
}

void check_window(const EventLog& log, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw ConfigError("window and stride must be positive");
  if (window > log.size()) {
    throw ConfigError("window of " + std::to_string(window) + " traces exceeds the log (" +
                      std::to_string(log.size()) + " traces)");
  }
}

}  // namespace

DfSeries df_series(const EventLog& log, const std::string& from, const std::string& to, std::size_t window,
                   std::size_t stride) {
  check_window(log, window, stride);
  return {from, to, window, stride, windowed(pair_counts(log, from, to), window, stride)};
}

Autocorrelation autocorrelation(std::span<const double> v, std::size_t max_lag) {
  const std::size_t n = v.size();
  if (max_lag >= n) {
    throw ConfigError("max lag " + std::to_string(max_lag) + " needs a series longer than " + std::to_string(n));
  }
  Autocorrelation out;
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
    out.r.assign(max_lag + 1, 1.0);
    out.degenerate = true;
    return out;
  }
  out.r.reserve(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    const std::size_t m = n - k;
    double ma = 0.0, mb = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      ma += v[t];
      mb += v[t + k];
    }
    ma /= static_cast<double>(m);
    mb /= static_cast<double>(m);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      const double a = v[t] - ma, b = v[t + k] - mb;
      cov += a * b;
      va += a * a;
      vb += b * b;
    }
    double r = 0.0;
    if (k == 0) {
      r = 1.0;
    } else if (va > 0.0 && vb > 0.0) {
      r = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
    }
    out.r.push_back(r);
  }
  return out;
}

std::vector<PairSummary> autocorr_report(const EventLog& log, std::size_t window, std::size_t max_lag,
                                         double weak_threshold) {
  check_window(log, window, 1);
  const auto universe = log.activity_universe();
  const auto n_traces = log.size();
  // per-trace directly-follows matrices, accumulated into per-pair counts
  const std::size_t n = universe.size();
  std::vector<std::vector<std::uint64_t>> counts(n * n, std::vector<std::uint64_t>(n_traces, 0));
  for (std::size_t i = 0; i < n_traces; ++i) {
    const auto m = df_matrix(log.slice(i, 1), universe);
    for (std::size_t c = 0; c < n * n; ++c) counts[c][i] = m.counts()[c];
  }
  std::vector<PairSummary> report;
  report.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      PairSummary s{universe[a], universe[b]};
      const auto values = windowed(counts[a * n + b], window, 1);
      const auto ac = autocorrelation(values, std::min(max_lag, values.size() - 1));
      s.degenerate = ac.degenerate;
      double sum = 0.0;
      for (std::size_t k = 1; k < ac.r.size(); ++k) sum += std::abs(ac.r[k]);
      s.mean_abs_r = ac.r.size() > 1 ? sum / static_cast<double>(ac.r.size() - 1) : 1.0;
      s.weak = !s.degenerate && s.mean_abs_r < weak_threshold;
      report.push_back(std::move(s));
    }
  }
  return report;
}

std::string report_csv(const std::vector<PairSummary>& report, const std::vector<std::string>& universe) {
  std::string out = "from\\to";
  for (const auto& u : universe) out += "," + u;
  out += "\n";
  const std::size_t n = universe.size();
  char buf[32];
  for (std::size_t a = 0; a < n; ++a) {
    out += universe[a];
    for (std::size_t b = 0; b < n; ++b) {
      const auto& s = report.at(a * n + b);
      if (s.degenerate) {
        out += ",degenerate";
      } else {
        std::snprintf(buf, sizeof buf, ",%.6f", s.mean_abs_r);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace pelp

#include "pelp/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>

#include "pelp/error.hpp"

namespace pelp {

VariantDistribution VariantDistribution::from_log(const EventLog& log) {
  std::map<Activities, std::size_t> counts;
  for (const auto& t : log.traces()) ++counts[t.activities];
  VariantDistribution d;
  for (auto& [variant, n] : counts) {
    d.variants.push_back(variant);
    d.counts.push_back(n);
  }
  return d;
}

std::size_t VariantDistribution::total() const {
  std::size_t n = 0;
  for (const auto c : counts) n += c;
  return n;
}

std::vector<double> VariantDistribution::probabilities() const {
  const double n = static_cast<double>(total());
  std::vector<double> p;
  for (const auto c : counts) p.push_back(static_cast<double>(c) / n);
  return p;
}

namespace {

VariantDistribution require_variants(const EventLog& train) {
  if (train.empty()) throw ConfigError("baselines need a non-empty training log");
  return VariantDistribution::from_log(train);
}

}  // namespace

EventLog highest_freq(const EventLog& train, std::size_t horizon) {
  const auto d = require_variants(train);
  // variants are sorted, so the first maximum is the smallest tied variant
  const auto best = std::max_element(d.counts.begin(), d.counts.end()) - d.counts.begin();
  return EventLog::from_sequences(std::vector<Activities>(horizon, d.variants[best]));
}

EventLog random_pred(const EventLog& train, std::size_t horizon, std::uint64_t seed) {
  const auto d = require_variants(train);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d.variants.size() - 1);
  std::vector<Activities> out;
  out.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) out.push_back(d.variants[pick(rng)]);
  return EventLog::from_sequences(std::move(out));
}

EventLog weighted_prob(const EventLog& train, std::size_t horizon, std::uint64_t seed) {
  const auto d = require_variants(train);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(d.counts.begin(), d.counts.end());
  std::vector<Activities> out;
  out.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) out.push_back(d.variants[pick(rng)]);
  return EventLog::from_sequences(std::move(out));
}

BaselineMethod parse_baseline(std::string_view name) {
  std::string s;
  for (const char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "highestfreq") return BaselineMethod::HighestFreq;
  if (s == "random" || s == "randompred") return BaselineMethod::RandomPred;
  if (s == "weighted" || s == "weightedprob") return BaselineMethod::WeightedProb;
  throw ConfigError("unknown baseline method '" + std::string(name) + "'");
}

std::string display_name(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::HighestFreq: return "HighestFreq";
    case BaselineMethod::RandomPred: return "RandomPred";
    case BaselineMethod::WeightedProb: return "WeightedProb";
  }
  return "?";
}

bool is_stochastic(BaselineMethod method) { return method != BaselineMethod::HighestFreq; }

Predictor baseline_predictor(BaselineMethod method, const EventLog& train, std::size_t horizon) {
  switch (method) {
    case BaselineMethod::HighestFreq:
      return [train, horizon](std::uint64_t) { return highest_freq(train, horizon); };
    case BaselineMethod::RandomPred:
      return [train, horizon](std::uint64_t s) { return random_pred(train, horizon, s); };
    case BaselineMethod::WeightedProb:
      return [train, horizon](std::uint64_t s) { return weighted_prob(train, horizon, s); };
  }
  throw ContractError("bad baseline method");
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    return s;
  }
  for (const double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

StochasticReport evaluate_stochastic(const Predictor& predictor, const EventLog& truth, std::size_t runs,
                                     std::uint64_t seed) {
  if (runs < 2) throw ConfigError("evaluate_stochastic needs at least 2 runs");
  StochasticReport report;
  std::vector<double> r, m;
  for (std::size_t k = 0; k < runs; ++k) {
    const auto d = compare_logs(predictor(seed + k), truth);
    report.runs.push_back(d);
    r.push_back(d.rmse);
    m.push_back(d.mae);
  }
  report.rmse = summarize(r);
  report.mae = summarize(m);
  return report;
}

}  // namespace pelp

#include "pelp/hypersearch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "pelp/dfg.hpp"
#include "pelp/error.hpp"
#include "pelp/predict.hpp"
#include "pelp/preprocess.hpp"

namespace pelp {

void SearchSpace::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("search space: bad ") + what + " range");
  };
  check(min_learning_rate >= HyperParams::kMinLearningRate && min_learning_rate <= max_learning_rate &&
            max_learning_rate <= HyperParams::kMaxLearningRate,
        "learning-rate");
  check(min_hidden >= HyperParams::kMinHidden && min_hidden <= max_hidden && max_hidden <= HyperParams::kMaxHidden,
        "hidden-size");
  check(min_dropout >= HyperParams::kMinDropout && min_dropout <= max_dropout &&
            max_dropout <= HyperParams::kMaxDropout,
        "dropout");
  check(min_window >= 1 && min_window <= max_window && max_window <= WindowSpec::kMaxTraces, "window");
}

std::vector<Trial> grid(const GridAxes& axes, std::uint64_t master_seed) {
  if (axes.learning_rates.empty() || axes.hidden_sizes.empty() || axes.dropouts.empty() || axes.windows.empty()) {
    throw ConfigError("every grid axis needs at least one value");
  }
  std::vector<Trial> trials;
  for (const double lr : axes.learning_rates) {
    for (const std::size_t hidden : axes.hidden_sizes) {
      for (const double dropout : axes.dropouts) {
        for (const auto& window : axes.windows) {
          Trial t;
          t.index = trials.size();
          t.hyper.learning_rate = lr;
          t.hyper.hidden_size = hidden;
          t.hyper.dropout = dropout;
          t.hyper.window = window;
          t.hyper.seed = master_seed + t.index;
          t.hyper.validate();
          trials.push_back(t);
        }
      }
    }
  }
  return trials;
}

std::vector<Trial> random_trials(const SearchSpace& space, std::size_t n, std::uint64_t master_seed) {
  space.validate();
  if (n < 1) throw ConfigError("random search needs at least one trial");
  std::vector<Trial> trials;
  trials.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::mt19937_64 rng(master_seed + k);
    auto log_uniform = [&](double lo, double hi) {
      const double v = std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
      return std::clamp(v, lo, hi);
    };
    auto integer = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    Trial t;
    t.index = k;
    t.hyper.learning_rate = log_uniform(space.min_learning_rate, space.max_learning_rate);
    t.hyper.dropout = log_uniform(space.min_dropout, space.max_dropout);
    t.hyper.hidden_size = integer(space.min_hidden, space.max_hidden);
    t.hyper.window.input_traces = integer(space.min_window, space.max_window);
    t.hyper.window.output_traces = integer(space.min_window, space.max_window);
    t.hyper.seed = master_seed + k;
    trials.push_back(t);
  }
  return trials;
}

std::vector<TrialResult> rank(std::vector<TrialResult> results) {
  std::sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
    if (a.ok != b.ok) return a.ok;
    if (a.ok) {
      if (a.rmse != b.rmse) return a.rmse < b.rmse;
      if (a.mae != b.mae) return a.mae < b.mae;
    }
    return a.index < b.index;
  });
  return results;
}

TrialResult run_trial(const Trial& trial, const EventLog& train, const EventLog& test, const TrainConfig& config) {
  TrialResult r;
  r.index = trial.index;
  r.hyper = trial.hyper;
  try {
    trial.hyper.validate();
    const auto vocab = build_vocab(train);
    const auto pairs = make_pairs(train, trial.hyper.window, vocab);
    TrainConfig cfg = config;
    cfg.learning_rate = trial.hyper.learning_rate;
    cfg.on_best = nullptr;
    cfg.on_epoch = nullptr;
    auto result = pelp::train(init_model(vocab.size(), trial.hyper), pairs, cfg);
    r.best_loss = result.log.best_loss;
    r.epochs = result.log.epochs.size();
    if (result.log.stop == StopReason::NonFinite) {
      r.message = result.log.failure;
      return r;
    }
    const std::size_t max_tokens = trial.hyper.max_tokens ? trial.hyper.max_tokens : default_max_tokens(pairs);
    const auto run = roll_forward(result.model, vocab, train, trial.hyper.window, test.size(), max_tokens);
    if (!run.warnings.empty()) r.message = run.warnings.front();
    if (run.predicted.empty() && !test.empty()) return r;
    const auto d = compare_logs(run.predicted, test);
    r.rmse = d.rmse;
    r.mae = d.mae;
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.message = e.what();
  }
  return r;
}

std::string results_csv_header() {
  return "index,learning_rate,hidden_size,dropout,p,q,seed,status,rmse,mae,best_loss,epochs,message\n";
}

std::string results_csv_row(const TrialResult& r) {
  std::string msg = r.message;
  std::replace(msg.begin(), msg.end(), ',', ';');
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::replace(msg.begin(), msg.end(), '\r', ' ');
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%.17g,%zu,%zu,%llu,%s,%.17g,%.17g,%.17g,%zu,", r.index,
                r.hyper.learning_rate, r.hyper.hidden_size, r.hyper.dropout, r.hyper.window.input_traces,
                r.hyper.window.output_traces, static_cast<unsigned long long>(r.hyper.seed), r.ok ? "ok" : "failed",
                r.rmse, r.mae, r.best_loss, r.epochs);
  return buf + msg + "\n";
}

std::vector<TrialResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<TrialResult> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    const auto end = content.find('\n', pos);
    if (end == std::string::npos) break;  // interrupted write
    const std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 12) f.emplace_back();
    if (f.size() != 13) throw ParseError(path.string() + ": bad results row", out.size() + 2);
    try {
      TrialResult r;
      r.index = std::stoull(f[0]);
      r.hyper.learning_rate = std::stod(f[1]);
      r.hyper.hidden_size = std::stoull(f[2]);
      r.hyper.dropout = std::stod(f[3]);
      r.hyper.window.input_traces = std::stoull(f[4]);
      r.hyper.window.output_traces = std::stoull(f[5]);
      r.hyper.seed = std::stoull(f[6]);
      r.ok = f[7] == "ok";
      r.rmse = std::stod(f[8]);
      r.mae = std::stod(f[9]);
      r.best_loss = std::stod(f[10]);
      r.epochs = std::stoull(f[11]);
      r.message = f[12];
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + ": bad number in results row", out.size() + 2);
    }
  }
  return out;
}

std::vector<TrialResult> run_search(const std::vector<Trial>& trials, const EventLog& train, const EventLog& test,
                                    const SearchOptions& options) {
  if (trials.empty()) throw ConfigError("search needs at least one trial");
  options.train.validate();

  std::map<std::size_t, TrialResult> done;
  std::ofstream report;
  if (options.report) {
    const bool resume = std::filesystem::exists(*options.report);
    if (resume) {
      for (auto& r : read_results_csv(*options.report)) done[r.index] = r;
      // drop a partial trailing line left by an interrupted run
      std::string rewritten = results_csv_header();
      for (const auto& [i, r] : done) rewritten += results_csv_row(r);
      std::ofstream(*options.report, std::ios::binary | std::ios::trunc) << rewritten;
    }
    report.open(*options.report, std::ios::binary | std::ios::app);
    if (!report) throw IoError("cannot write '" + options.report->string() + "'");
    if (!resume) report << results_csv_header() << std::flush;
  }

  std::vector<const Trial*> pending;
  for (const auto& t : trials) {
    if (!done.count(t.index)) pending.push_back(&t);
  }
  std::mutex writer;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < pending.size();) {
      auto r = run_trial(*pending[i], train, test, options.train);
      const std::lock_guard lock(writer);
      if (report.is_open()) report << results_csv_row(r) << std::flush;
      done[r.index] = std::move(r);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(1, pending.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<TrialResult> results;
  for (const auto& t : trials) results.push_back(done.at(t.index));
  return rank(std::move(results));
}

}  // namespace pelp

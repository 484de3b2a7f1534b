#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pelp/artifact.hpp"
#include "pelp/dfg.hpp"
#include "pelp/error.hpp"
#include "pelp/eventlog.hpp"
#include "pelp/neural.hpp"
#include "pelp/training.hpp"

namespace pelp {

struct PipelineConfig {
  std::filesystem::path input;      // raw CSV, or a text log when input_is_text
  bool input_is_text = false;
  CsvOptions csv;
  std::size_t head = 1000;          // traces kept from the start of the log
  double train_fraction = 0.8;
  HyperParams hyper;                // window defaults to p = 3, q = 2
  std::size_t patience = 100;
  std::optional<std::size_t> max_epochs;
  double zero_loss = 5e-5;
  std::size_t baseline_runs = 100;
  std::uint64_t seed = 0;           // master seed: model, dropout and baseline draws
  std::filesystem::path out_dir;
  /// Reuse model.ckpt from an earlier run with the same configuration.
  bool resume = false;
  std::function<void(const std::string&)> progress;

  PipelineConfig();
  /// Every setting that influences results, as canonical JSON (paths and
  /// progress callbacks excluded).
  std::string canonical() const;
  void validate() const;
};

struct MethodRow {
  std::string method;
  LogDistance mean;
  std::optional<LogDistance> std;  // stochastic methods only
};

struct EvalReport {
  Stamp stamp;
  std::size_t train_traces = 0;
  std::size_t test_traces = 0;
  std::size_t predicted_traces = 0;
  std::size_t vocab_size = 0;
  std::size_t pairs = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_loss = 0.0;
  std::string stop_reason;
  std::size_t baseline_runs = 0;
  std::vector<std::string> warnings;
  std::vector<MethodRow> rows;  // HighestFreq, RandomPred, WeightedProb, PELP

  std::string to_json() const;
  /// Aligned text table, one row per method, "mean±std" for stochastic rows.
  std::string to_table() const;
};

/// A stage failed. Carries the stage name, the artifacts finished before it
/// and the original exception.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, std::vector<std::filesystem::path> completed, std::exception_ptr cause,
               const std::string& what);
  const std::string& stage() const noexcept { return stage_; }
  const std::vector<std::filesystem::path>& completed() const noexcept { return completed_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  std::vector<std::filesystem::path> completed_;
  std::exception_ptr cause_;
};

/// preprocess -> split -> pairs -> train -> predict -> evaluate, writing
/// log.txt, train.txt, test.txt, vocab.json, model.ckpt, train_log.csv,
/// pred.txt, report.json and report.txt into out_dir.
EvalReport run_pipeline(const PipelineConfig& config);

/// Scores a prediction against the truth plus the three baselines, in the
/// fixed report row order.
std::vector<MethodRow> evaluate_methods(const EventLog& train, const EventLog& truth, const EventLog& predicted,
                                        std::size_t runs, std::uint64_t seed);

}  // namespace pelp

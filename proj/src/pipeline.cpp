#include "pelp/pipeline.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "pelp/baselines.hpp"
#include "pelp/checkpoint.hpp"
#include "pelp/predict.hpp"
#include "pelp/preprocess.hpp"

namespace pelp {

namespace fs = std::filesystem;

PipelineConfig::PipelineConfig() {
  hyper.window = {3, 2};
}

std::string PipelineConfig::canonical() const {
  nlohmann::ordered_json j;
  j["input_is_text"] = input_is_text;
  j["case_column"] = csv.case_column;
  j["time_column"] = csv.time_column;
  j["activity_column"] = csv.activity_column;
  j["time_format"] = csv.time_format;
  j["delimiter"] = std::string(1, csv.delimiter);
  j["head"] = head;
  j["train_fraction"] = train_fraction;
  j["learning_rate"] = hyper.learning_rate;
  j["hidden_size"] = hyper.hidden_size;
  j["dropout"] = hyper.dropout;
  j["input_traces"] = hyper.window.input_traces;
  j["output_traces"] = hyper.window.output_traces;
  j["max_tokens"] = hyper.max_tokens;
  j["patience"] = patience;
  j["max_epochs"] = max_epochs ? nlohmann::ordered_json(*max_epochs) : nlohmann::ordered_json(nullptr);
  j["zero_loss"] = zero_loss;
  j["baseline_runs"] = baseline_runs;
  j["seed"] = seed;
  return j.dump();
}

void PipelineConfig::validate() const {
  if (input.empty()) throw ConfigError("pipeline needs an input log");
  if (out_dir.empty()) throw ConfigError("pipeline needs an output directory");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  if (baseline_runs < 2) throw ConfigError("baseline runs must be at least 2");
  HyperParams h = hyper;
  h.validate();
}

StageFailure::StageFailure(std::string stage, std::vector<fs::path> completed, std::exception_ptr cause,
                           const std::string& what)
    : Error(what), stage_(std::move(stage)), completed_(std::move(completed)), cause_(cause) {}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Restores epoch counts from an earlier run's train_log.csv.
void read_epoch_summary(const fs::path& path, EvalReport& report) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  double best = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string epoch, loss;
    std::getline(ss, epoch, ',');
    std::getline(ss, loss, ',');
    ++report.epochs;
    const double l = std::stod(loss);
    if (l < best) {
      best = l;
      report.best_epoch = std::stoull(epoch);
    }
  }
}

}  // namespace

std::vector<MethodRow> evaluate_methods(const EventLog& train, const EventLog& truth, const EventLog& predicted,
                                        std::size_t runs, std::uint64_t seed) {
  std::vector<MethodRow> rows;
  for (const auto method : {BaselineMethod::HighestFreq, BaselineMethod::RandomPred, BaselineMethod::WeightedProb}) {
    MethodRow row{display_name(method), {}, std::nullopt};
    if (is_stochastic(method)) {
      const auto rep = evaluate_stochastic(baseline_predictor(method, train, truth.size()), truth, runs, seed);
      row.mean = {rep.rmse.mean, rep.mae.mean};
      row.std = LogDistance{rep.rmse.std, rep.mae.std};
    } else {
      row.mean = compare_logs(highest_freq(train, truth.size()), truth);
    }
    rows.push_back(row);
  }
  rows.push_back({"PELP", compare_logs(predicted, truth), std::nullopt});
  return rows;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "pelp-report";
  j["version"] = 1;
  j["meta"] = nlohmann::ordered_json::parse(stamp.to_json());
  j["train_traces"] = train_traces;
  j["test_traces"] = test_traces;
  j["predicted_traces"] = predicted_traces;
  j["vocab_size"] = vocab_size;
  j["pairs"] = pairs;
  j["epochs"] = epochs;
  j["best_epoch"] = best_epoch;
  j["best_loss"] = best_loss;
  j["stop_reason"] = stop_reason;
  j["baseline_runs"] = baseline_runs;
  j["std_estimator"] = "sample (n-1)";
  j["warnings"] = warnings;
  auto& methods = j["methods"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json m;
    m["method"] = r.method;
    m["rmse"] = r.mean.rmse;
    m["mae"] = r.mean.mae;
    m["rmse_std"] = r.std ? nlohmann::ordered_json(r.std->rmse) : nlohmann::ordered_json(nullptr);
    m["mae_std"] = r.std ? nlohmann::ordered_json(r.std->mae) : nlohmann::ordered_json(nullptr);
    methods.push_back(m);
  }
  return j.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
  std::vector<std::array<std::string, 3>> cells{{"Method", "RMSE", "MAE"}};
  for (const auto& r : rows) {
    auto cell = [&](double mean, std::optional<double> sd) {
      return sd ? fixed(mean, 4) + "±" + fixed(*sd, 4) : fixed(mean, 4);
    };
    cells.push_back({r.method, cell(r.mean.rmse, r.std ? std::optional(r.std->rmse) : std::nullopt),
                     cell(r.mean.mae, r.std ? std::optional(r.std->mae) : std::nullopt)});
  }
  // "±" is two bytes in UTF-8 but one column wide
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (const unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::array<std::size_t, 3> widths{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 3; ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 3; ++c) {
      out += row[c];
      if (c + 1 < 3) out += std::string(widths[c] - width(row[c]) + 2, ' ');
    }
    out += "\n";
  }
  return out;
}

EvalReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);
  const Stamp stamp = make_stamp(config.canonical(), config.seed);
  const fs::path dir = config.out_dir;
  std::vector<fs::path> completed;
  std::string stage;
  auto say = [&](const std::string& msg) {
    if (config.progress) config.progress(msg);
  };
  auto finish = [&](const fs::path& p) {
    completed.push_back(p);
    say("wrote " + p.string());
  };
  auto text_artifact = [&](const EventLog& log, const std::string& name) {
    const auto path = dir / name;
    write_text(log, path);
    write_sidecar(path, stamp);
    finish(path);
  };

  EvalReport report;
  report.stamp = stamp;
  report.baseline_runs = config.baseline_runs;
  try {
    stage = "preprocess";
    say("stage " + stage);
    EventLog log;
    if (config.input_is_text) {
      log = read_text(config.input);
    } else {
      auto events = read_events_csv(config.input, config.csv);
      sanitize_events(events);
      log = build_traces(std::move(events));
    }
    log = select_head(log, config.head);
    text_artifact(log, "log.txt");

    stage = "split";
    say("stage " + stage);
    auto parts = split(log, config.train_fraction);
    if (parts.degenerate_training) throw ConfigError("the split leaves no training traces");
    text_artifact(parts.train, "train.txt");
    text_artifact(parts.test, "test.txt");
    report.train_traces = parts.train.size();
    report.test_traces = parts.test.size();

    stage = "pairs";
    say("stage " + stage);
    const auto vocab = build_vocab(parts.train);
    write_vocab(vocab, dir / "vocab.json", stamp.to_json());
    finish(dir / "vocab.json");
    PairSet set{config.hyper.window, vocab.hash(), make_pairs(parts.train, config.hyper.window, vocab)};
    write_pairs(set, dir / "pairs.bin");
    write_sidecar(dir / "pairs.bin", stamp);
    finish(dir / "pairs.bin");
    report.vocab_size = vocab.size();
    report.pairs = set.pairs.size();

    stage = "train";
    say("stage " + stage);
    HyperParams hyper = config.hyper;
    hyper.seed = config.seed;
    if (hyper.max_tokens == 0) hyper.max_tokens = default_max_tokens(set.pairs);
    const fs::path ckpt_path = dir / "model.ckpt";
    ModelState model;
    bool resumed = false;
    if (config.resume && fs::exists(ckpt_path) && fs::exists(dir / "train_log.csv")) {
      auto ckpt = read_checkpoint(ckpt_path);
      if (ckpt.stamp == stamp && ckpt.vocab == vocab) {
        model = std::move(ckpt.model);
        read_epoch_summary(dir / "train_log.csv", report);
        report.best_loss = mean_loss(model, set.pairs);
        report.stop_reason = "resumed";
        resumed = true;
        say("reusing " + ckpt_path.string());
        completed.push_back(ckpt_path);
        completed.push_back(dir / "train_log.csv");
      }
    }
    if (!resumed) {
      TrainConfig tc;
      tc.learning_rate = hyper.learning_rate;
      tc.patience_epochs = config.patience;
      tc.max_epochs = config.max_epochs;
      tc.zero_loss = config.zero_loss;
      tc.on_best = [&](const ModelState& m, std::size_t, double) {
        write_checkpoint({m, hyper, vocab, stamp}, ckpt_path);
      };
      tc.on_epoch = [&](std::size_t epoch, double loss, double seconds) {
        if (epoch == 1 || epoch % 10 == 0) say("epoch " + std::to_string(epoch) + " loss " + fixed(loss, 6) + " (" + fixed(seconds, 2) + " s)");
      };
      auto result = train(init_model(vocab.size(), hyper), set.pairs, tc);
      write_train_log(result.log, dir / "train_log.csv");
      if (result.log.stop == StopReason::NonFinite) {
        if (result.log.best_epoch > 0) completed.push_back(ckpt_path);
        throw NumericError(result.log.failure);
      }
      finish(ckpt_path);
      finish(dir / "train_log.csv");
      model = std::move(result.model);
      report.epochs = result.log.epochs.size();
      report.best_epoch = result.log.best_epoch;
      report.best_loss = result.log.best_loss;
      report.stop_reason = to_string(result.log.stop);
    }

    stage = "predict";
    say("stage " + stage);
    const auto run = roll_forward(model, vocab, parts.train, hyper.window, parts.test.size(), hyper.max_tokens);
    text_artifact(run.predicted, "pred.txt");
    report.predicted_traces = run.predicted.size();
    report.warnings = run.warnings;

    stage = "evaluate";
    say("stage " + stage);
    report.rows = evaluate_methods(parts.train, parts.test, run.predicted, config.baseline_runs, config.seed);
    write_file(dir / "report.json", report.to_json());
    finish(dir / "report.json");
    write_file(dir / "report.txt", report.to_table());
    finish(dir / "report.txt");
  } catch (const Error& e) {
    std::string what = "stage '" + stage + "' failed: " + e.what();
    if (!completed.empty()) {
      what += "\ncompleted artifacts:";
      for (const auto& p : completed) what += "\n  " + p.string();
    }
    throw StageFailure(stage, completed, std::current_exception(), what);
  }
  return report;
}

}  // namespace pelp

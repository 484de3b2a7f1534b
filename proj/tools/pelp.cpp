// pelp: event-log forecasting command line.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "pelp/analysis.hpp"
#include "pelp/artifact.hpp"
#include "pelp/baselines.hpp"
#include "pelp/checkpoint.hpp"
#include "pelp/dfg.hpp"
#include "pelp/error.hpp"
#include "pelp/eventlog.hpp"
#include "pelp/hypersearch.hpp"
#include "pelp/pipeline.hpp"
#include "pelp/predict.hpp"
#include "pelp/preprocess.hpp"
#include "pelp/synthetic.hpp"
#include "pelp/training.hpp"

namespace fs = std::filesystem;
using namespace pelp;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kParse = 4,
  kIo = 5,
  kNumeric = 6,
  kContract = 7,
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

Stamp stamp_for(const CLI::App& sub, std::uint64_t seed) {
  return make_stamp(sub.get_name() + "\n" + sub.config_to_str(true, false), seed);
}

struct CsvFlags {
  CsvOptions options;
  std::string delimiter = ",";

  void add(CLI::App* sub) {
    sub->add_option("--case-col", options.case_column, "Case identifier column")->capture_default_str();
    sub->add_option("--time-col", options.time_column, "Timestamp column")->capture_default_str();
    sub->add_option("--act-col", options.activity_column, "Activity column")->capture_default_str();
    sub->add_option("--time-format", options.time_format,
                    "\"iso8601\", \"integer\" or a strftime-style pattern such as %Y/%m/%d %H:%M:%S")
        ->capture_default_str();
    sub->add_option("--delimiter", delimiter, "Field delimiter (one character)")->capture_default_str();
  }

  CsvOptions get() const {
    if (delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
    CsvOptions o = options;
    o.delimiter = delimiter[0];
    return o;
  }
};

EventLog load_raw(const fs::path& input, const CsvOptions& csv) {
  auto events = read_events_csv(input, csv);
  sanitize_events(events);
  return build_traces(std::move(events));
}

WindowSpec parse_window(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("window '" + text + "' must look like PxQ");
  try {
    WindowSpec w{std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1))};
    w.validate();
    return w;
  } catch (const std::logic_error&) {
    throw ConfigError("window '" + text + "' must look like PxQ");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forecast the future traces of a business-process event log."};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  std::function<void()> action;

  // preprocess ---------------------------------------------------------------
  auto* pre = app.add_subcommand("preprocess", "Raw CSV events to a sanitized, ordered text log");
  fs::path pre_in, pre_out;
  std::optional<std::size_t> pre_head;
  CsvFlags pre_csv;
  pre->add_option("--input", pre_in, "Raw CSV log")->required()->check(CLI::ExistingFile);
  pre->add_option("--output", pre_out, "Text log to write")->required();
  pre->add_option("--head", pre_head, "Keep only the first N traces");
  pre_csv.add(pre);
  pre->callback([&] {
    action = [&] {
      auto log = load_raw(pre_in, pre_csv.get());
      if (pre_head) log = select_head(log, *pre_head);
      write_text(log, pre_out);
      write_sidecar(pre_out, stamp_for(*pre, 0));
      std::cout << "wrote " << log.size() << " traces to " << pre_out.string() << "\n";
    };
  });

  // stats --------------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "Log characteristics (cases, variants, case lengths)");
  fs::path stats_log, stats_csv;
  CsvFlags stats_flags;
  std::optional<std::size_t> stats_head;
  auto* stats_log_opt = stats->add_option("--log", stats_log, "Text log")->check(CLI::ExistingFile);
  stats->add_option("--input", stats_csv, "Raw CSV log")->check(CLI::ExistingFile)->excludes(stats_log_opt);
  stats->add_option("--head", stats_head, "Only the first N traces");
  stats_flags.add(stats);
  stats->callback([&] {
    action = [&] {
      if (stats_log.empty() && stats_csv.empty()) throw ConfigError("stats needs --log or --input");
      auto log = stats_log.empty() ? load_raw(stats_csv, stats_flags.get()) : read_text(stats_log);
      if (stats_head) log = select_head(log, *stats_head);
      std::cout << log_stats(log).to_string();
    };
  });

  // pairs --------------------------------------------------------------------
  auto* pairs = app.add_subcommand("pairs", "Sliding-window training pairs from a text log");
  fs::path pairs_log, pairs_vocab, pairs_out;
  WindowSpec pairs_window{3, 2};
  bool pairs_reuse = false;
  pairs->add_option("--log", pairs_log, "Training text log")->required()->check(CLI::ExistingFile);
  pairs->add_option("--in-traces,-p", pairs_window.input_traces, "Input traces per pair (p)")->capture_default_str();
  pairs->add_option("--out-traces,-q", pairs_window.output_traces, "Output traces per pair (q)")->capture_default_str();
  pairs->add_option("--vocab", pairs_vocab, "Vocabulary JSON (written unless --reuse-vocab)")->required();
  pairs->add_flag("--reuse-vocab", pairs_reuse, "Read --vocab instead of building it from the log");
  pairs->add_option("--output", pairs_out, "Binary pair file")->default_val("pairs.bin");
  pairs->callback([&] {
    action = [&] {
      const auto log = read_text(pairs_log);
      const auto stamp = stamp_for(*pairs, 0);
      Vocabulary vocab;
      if (pairs_reuse) {
        vocab = read_vocab(pairs_vocab);
      } else {
        if (log.empty()) throw ConfigError("cannot build a vocabulary from an empty log");
        vocab = build_vocab(log);
        write_vocab(vocab, pairs_vocab, stamp.to_json());
      }
      PairSet set{pairs_window, vocab.hash(), make_pairs(log, pairs_window, vocab)};
      write_pairs(set, pairs_out);
      write_sidecar(pairs_out, stamp);
      std::cout << "wrote " << set.pairs.size() << " pairs (vocabulary " << vocab.size() << ") to "
                << pairs_out.string() << "\n";
    };
  });

  // train --------------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "Train the encoder / attention-decoder with SGD");
  fs::path tr_pairs, tr_vocab, tr_out, tr_log;
  HyperParams tr_hyper;
  std::size_t tr_patience = 100;
  std::optional<std::size_t> tr_max_epochs;
  double tr_zero = 5e-5;
  bool tr_quiet = false;
  tr->add_option("--pairs", tr_pairs, "Pair file from 'pairs'")->required()->check(CLI::ExistingFile);
  tr->add_option("--vocab", tr_vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--lr", tr_hyper.learning_rate, "Learning rate [0.001, 0.3]")->capture_default_str();
  tr->add_option("--hidden", tr_hyper.hidden_size, "Hidden size [16, 1024]")->capture_default_str();
  tr->add_option("--dropout", tr_hyper.dropout, "Dropout [0.001, 0.3]")->capture_default_str();
  tr->add_option("--patience", tr_patience, "Stop after this many epochs without improvement")->capture_default_str();
  tr->add_option("--max-epochs", tr_max_epochs, "Epoch cap");
  tr->add_option("--zero-loss", tr_zero, "Loss treated as zero")->capture_default_str();
  tr->add_option("--max-tokens", tr_hyper.max_tokens, "Generation cap stored in the model (0: 2 x longest target)")
      ->capture_default_str();
  tr->add_option("--seed", tr_hyper.seed, "Initialisation and dropout seed")->capture_default_str();
  tr->add_option("--out", tr_out, "Checkpoint of the best epoch")->required();
  tr->add_option("--log-csv", tr_log, "Per-epoch loss CSV (default: <out>.log.csv)");
  tr->add_flag("--quiet", tr_quiet, "No per-epoch output");
  tr->callback([&] {
    action = [&] {
      const auto vocab = read_vocab(tr_vocab);
      const auto set = read_pairs(tr_pairs);
      if (set.vocab_hash != vocab.hash()) throw ConfigError("pair file was built with a different vocabulary");
      tr_hyper.window = set.window;
      if (tr_hyper.max_tokens == 0) tr_hyper.max_tokens = default_max_tokens(set.pairs);
      const auto stamp = stamp_for(*tr, tr_hyper.seed);
      TrainConfig tc;
      tc.learning_rate = tr_hyper.learning_rate;
      tc.patience_epochs = tr_patience;
      tc.max_epochs = tr_max_epochs;
      tc.zero_loss = tr_zero;
      tc.on_best = [&](const ModelState& m, std::size_t, double) {
        write_checkpoint({m, tr_hyper, vocab, stamp}, tr_out);
      };
      tc.on_epoch = [&](std::size_t epoch, double loss, double seconds) {
        if (!tr_quiet) std::cerr << "epoch " << epoch << " loss " << fmt(loss) << " " << fmt(seconds) << "s\n";
      };
      auto result = train(init_model(vocab.size(), tr_hyper), set.pairs, tc);
      const fs::path log_path = tr_log.empty() ? fs::path(tr_out.string() + ".log.csv") : tr_log;
      write_train_log(result.log, log_path);
      if (result.log.stop == StopReason::NonFinite) throw NumericError(result.log.failure);
      std::cout << "best epoch " << result.log.best_epoch << " loss " << fmt(result.log.best_loss) << " after "
                << result.log.epochs.size() << " epochs (" << to_string(result.log.stop) << ")\n";
    };
  });

  // predict ------------------------------------------------------------------
  auto* pr = app.add_subcommand("predict", "Roll the model forward from the end of the training log");
  fs::path pr_model, pr_train, pr_out;
  std::size_t pr_horizon = 0, pr_max_tokens = 0;
  pr->add_option("--model", pr_model, "Checkpoint")->required()->check(CLI::ExistingFile);
  pr->add_option("--train", pr_train, "Training text log")->required()->check(CLI::ExistingFile);
  pr->add_option("--horizon", pr_horizon, "Number of future traces")->required();
  pr->add_option("--max-tokens", pr_max_tokens, "Tokens per generation call (0: from the checkpoint)");
  pr->add_option("--out", pr_out, "Predicted text log")->required();
  pr->callback([&] {
    action = [&] {
      const auto ckpt = read_checkpoint(pr_model);
      const auto train_log = read_text(pr_train);
      const std::size_t cap = pr_max_tokens ? pr_max_tokens : ckpt.hyper.max_tokens;
      const auto run = roll_forward(ckpt.model, ckpt.vocab, train_log, ckpt.hyper.window, pr_horizon, cap);
      write_text(run.predicted, pr_out);
      write_sidecar(pr_out, stamp_for(*pr, ckpt.model.seed));
      for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << run.predicted.size() << " traces in " << run.steps << " steps to " << pr_out.string()
                << "\n";
    };
  });

  // evaluate -----------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "RMSE and MAE between directly-follows matrices of two logs");
  fs::path ev_pred, ev_truth, ev_matrices;
  ev->add_option("--pred", ev_pred, "Predicted text log")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", ev_truth, "Ground-truth text log")->required()->check(CLI::ExistingFile);
  ev->add_option("--matrices", ev_matrices, "Directory for the aligned matrices as CSV");
  ev->callback([&] {
    action = [&] {
      const auto [p, t] = align(df_matrix(read_text(ev_pred)), df_matrix(read_text(ev_truth)));
      if (!ev_matrices.empty()) {
        fs::create_directories(ev_matrices);
        write_csv(p, ev_matrices / "predicted.csv");
        write_csv(t, ev_matrices / "truth.csv");
      }
      nlohmann::ordered_json j;
      j["rmse"] = rmse(p, t);
      j["mae"] = mae(p, t);
      j["activities"] = p.size();
      std::cout << j.dump(2) << "\n";
    };
  });

  // baseline -----------------------------------------------------------------
  auto* bl = app.add_subcommand("baseline", "Score a reference predictor over repeated runs");
  std::string bl_method;
  fs::path bl_train, bl_truth, bl_json;
  std::size_t bl_runs = 100;
  std::uint64_t bl_seed = 0;
  bl->add_option("--method", bl_method, "highestfreq | random | weighted")
      ->required()
      ->check(CLI::IsMember({"highestfreq", "random", "weighted"}, CLI::ignore_case));
  bl->add_option("--train", bl_train, "Training text log")->required()->check(CLI::ExistingFile);
  bl->add_option("--truth", bl_truth, "Ground-truth text log")->required()->check(CLI::ExistingFile);
  bl->add_option("--runs", bl_runs, "Runs for stochastic methods")->capture_default_str();
  bl->add_option("--seed", bl_seed, "Seed of run 0 (run k uses seed + k)")->capture_default_str();
  bl->add_option("--json", bl_json, "Also write the report as JSON");
  bl->callback([&] {
    action = [&] {
      const auto method = parse_baseline(bl_method);
      const auto train_log = read_text(bl_train);
      const auto truth = read_text(bl_truth);
      EvalReport rep;
      rep.stamp = stamp_for(*bl, bl_seed);
      rep.train_traces = train_log.size();
      rep.test_traces = truth.size();
      rep.baseline_runs = bl_runs;
      MethodRow row{display_name(method), {}, std::nullopt};
      if (is_stochastic(method)) {
        const auto s = evaluate_stochastic(baseline_predictor(method, train_log, truth.size()), truth, bl_runs, bl_seed);
        row.mean = {s.rmse.mean, s.mae.mean};
        row.std = LogDistance{s.rmse.std, s.mae.std};
      } else {
        row.mean = compare_logs(highest_freq(train_log, truth.size()), truth);
      }
      rep.rows.push_back(row);
      if (!bl_json.empty()) write_file(bl_json, rep.to_json());
      std::cout << rep.to_table();
    };
  });

  // synth --------------------------------------------------------------------
  auto* sy = app.add_subcommand("synth", "Generate a seasonal synthetic log");
  std::string sy_family;
  std::size_t sy_season = 2;
  std::optional<std::size_t> sy_total;
  fs::path sy_out;
  bool sy_suite = false;
  sy->add_option("--family", sy_family, "parallel | longloop | shortloop | skip | tri1 | tri2")
      ->check(CLI::IsMember(family_names()));
  sy->add_option("--season", sy_season, "Repeats per variant [2, 5]")->capture_default_str();
  sy->add_option("--total", sy_total, "Number of traces (default: 40 periods)");
  sy->add_option("--out", sy_out, "Text log, or a directory with --suite")->required();
  sy->add_flag("--suite", sy_suite, "Write all 18 logs of the standard suite into --out");
  sy->callback([&] {
    action = [&] {
      const auto stamp = stamp_for(*sy, 0);
      if (sy_suite) {
        fs::create_directories(sy_out);
        for (const auto& e : standard_suite()) {
          write_text(e.log, sy_out / (e.name + ".txt"));
          write_sidecar(sy_out / (e.name + ".txt"), stamp);
        }
        std::cout << "wrote 18 logs to " << sy_out.string() << "\n";
        return;
      }
      if (sy_family.empty()) throw ConfigError("synth needs --family (or --suite)");
      const auto spec = family_spec(sy_family, sy_season);
      const auto log = generate(spec, sy_total.value_or(kSuitePeriods * spec.period()));
      write_text(log, sy_out);
      write_sidecar(sy_out, stamp);
      std::cout << "wrote " << log.size() << " traces (period " << spec.period() << ") to " << sy_out.string() << "\n";
    };
  });

  // autocorr -----------------------------------------------------------------
  auto* ac = app.add_subcommand("autocorr", "Auto-correlation of sliding-window directly-follows frequencies");
  fs::path ac_log, ac_out, ac_series;
  std::string ac_from, ac_to;
  std::size_t ac_window = 200, ac_lag = 50;
  ac->add_option("--log", ac_log, "Text log")->required()->check(CLI::ExistingFile);
  auto* from_opt = ac->add_option("--from", ac_from, "Source activity (omit for the full N x N report)");
  ac->add_option("--to", ac_to, "Target activity")->needs(from_opt);
  from_opt->needs(ac->get_option("--to"));
  ac->add_option("--window", ac_window, "Window size in traces")->capture_default_str();
  ac->add_option("--max-lag", ac_lag, "Largest lag")->capture_default_str();
  ac->add_option("--out", ac_out, "CSV: lag,r (single pair) or the summary matrix")->required();
  ac->add_option("--series-out", ac_series, "CSV of the raw windowed frequencies (single pair)");
  ac->callback([&] {
    action = [&] {
      const auto log = read_text(ac_log);
      if (ac_from.empty()) {
        const auto report = autocorr_report(log, ac_window, ac_lag);
        write_file(ac_out, report_csv(report, log.activity_universe()));
        std::size_t weak = 0;
        for (const auto& s : report) weak += s.weak;
        std::cout << report.size() << " pairs, " << weak << " weakly correlated\n";
        return;
      }
      const auto series = df_series(log, ac_from, ac_to, ac_window);
      const auto r = autocorrelation(series.values, ac_lag);
      std::string csv = "lag,r\n";
      char buf[64];
      for (std::size_t k = 0; k < r.r.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", k, r.r[k]);
        csv += buf;
      }
      write_file(ac_out, csv);
      if (!ac_series.empty()) {
        std::string s = "index,frequency\n";
        for (std::size_t k = 0; k < series.values.size(); ++k) s += std::to_string(k) + "," + fmt(series.values[k]) + "\n";
        write_file(ac_series, s);
      }
      if (r.degenerate) std::cerr << "warning: constant series, correlation is degenerate\n";
      std::cout << series.values.size() << " windows, " << r.r.size() << " lags\n";
    };
  });

  // search -------------------------------------------------------------------
  auto* se = app.add_subcommand("search", "Grid or random hyper-parameter search");
  std::string se_strategy = "random";
  std::size_t se_trials = 10, se_threads = 1, se_patience = 100;
  std::uint64_t se_seed = 0;
  std::optional<std::size_t> se_budget;
  fs::path se_log, se_report;
  double se_fraction = 0.8;
  SearchSpace se_space;
  std::vector<double> se_lrs{0.05}, se_dropouts{0.001};
  std::vector<std::size_t> se_hiddens{64};
  std::vector<std::string> se_windows{"3x2"};
  se->add_option("--strategy", se_strategy, "grid | random")->check(CLI::IsMember({"grid", "random"}))->capture_default_str();
  se->add_option("--trials", se_trials, "Random trials")->capture_default_str();
  se->add_option("--seed", se_seed, "Master seed (trial k uses seed + k)")->capture_default_str();
  se->add_option("--budget-epochs", se_budget, "Epoch cap per trial");
  se->add_option("--patience", se_patience, "Early-stop patience per trial")->capture_default_str();
  se->add_option("--log", se_log, "Text log; split into train / test")->required()->check(CLI::ExistingFile);
  se->add_option("--train-fraction", se_fraction, "Training share of the traces")->capture_default_str();
  se->add_option("--report", se_report, "Results CSV (resumed when it exists)")->required();
  se->add_option("--threads", se_threads, "Concurrent trials")->capture_default_str();
  se->add_option("--lrs", se_lrs, "Grid: learning rates")->capture_default_str();
  se->add_option("--hiddens", se_hiddens, "Grid: hidden sizes")->capture_default_str();
  se->add_option("--dropouts", se_dropouts, "Grid: dropout rates")->capture_default_str();
  se->add_option("--windows", se_windows, "Grid: windows as PxQ")->capture_default_str();
  se->add_option("--max-hidden", se_space.max_hidden, "Random: largest hidden size")->capture_default_str();
  se->add_option("--min-window", se_space.min_window, "Random: smallest p and q")->capture_default_str();
  se->add_option("--max-window", se_space.max_window, "Random: largest p and q")->capture_default_str();
  se->callback([&] {
    action = [&] {
      const auto parts = split(read_text(se_log), se_fraction);
      if (parts.degenerate_training) throw ConfigError("the split leaves no training traces");
      std::vector<Trial> trials;
      if (se_strategy == "grid") {
        GridAxes axes{se_lrs, se_hiddens, se_dropouts, {}};
        for (const auto& w : se_windows) axes.windows.push_back(parse_window(w));
        trials = grid(axes, se_seed);
      } else {
        trials = random_trials(se_space, se_trials, se_seed);
      }
      SearchOptions opt;
      opt.train.patience_epochs = se_patience;
      opt.train.max_epochs = se_budget;
      opt.threads = se_threads;
      opt.report = se_report;
      const auto results = run_search(trials, parts.train, parts.test, opt);
      std::cout << "rank,index,lr,hidden,dropout,p,q,rmse,mae,status\n";
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::cout << i + 1 << "," << r.index << "," << r.hyper.learning_rate << "," << r.hyper.hidden_size << ","
                  << r.hyper.dropout << "," << r.hyper.window.input_traces << "," << r.hyper.window.output_traces << ","
                  << fmt(r.rmse) << "," << fmt(r.mae) << "," << (r.ok ? "ok" : "failed: " + r.message) << "\n";
      }
    };
  });

  // pipeline -----------------------------------------------------------------
  auto* pl = app.add_subcommand("pipeline", "All stages: preprocess, split, pairs, train, predict, evaluate");
  PipelineConfig plc;
  CsvFlags pl_csv;
  bool pl_quiet = false;
  pl->add_option("--input", plc.input, "Raw CSV log (or text log with --text)")->required()->check(CLI::ExistingFile);
  pl->add_flag("--text", plc.input_is_text, "Input is already a text log");
  pl_csv.add(pl);
  pl->add_option("--out-dir", plc.out_dir, "Directory for all artifacts")->required();
  pl->add_option("--head", plc.head, "Traces kept from the start of the log")->capture_default_str();
  pl->add_option("--train-fraction", plc.train_fraction, "Training share of the traces")->capture_default_str();
  pl->add_option("--in-traces,-p", plc.hyper.window.input_traces, "Input traces per pair")->capture_default_str();
  pl->add_option("--out-traces,-q", plc.hyper.window.output_traces, "Output traces per pair")->capture_default_str();
  pl->add_option("--lr", plc.hyper.learning_rate, "Learning rate")->capture_default_str();
  pl->add_option("--hidden", plc.hyper.hidden_size, "Hidden size")->capture_default_str();
  pl->add_option("--dropout", plc.hyper.dropout, "Dropout")->capture_default_str();
  pl->add_option("--max-tokens", plc.hyper.max_tokens, "Tokens per generation call (0: 2 x longest target)")
      ->capture_default_str();
  pl->add_option("--patience", plc.patience, "Early-stop patience")->capture_default_str();
  pl->add_option("--max-epochs", plc.max_epochs, "Epoch cap");
  pl->add_option("--zero-loss", plc.zero_loss, "Loss treated as zero")->capture_default_str();
  pl->add_option("--runs", plc.baseline_runs, "Runs for stochastic baselines")->capture_default_str();
  pl->add_option("--seed", plc.seed, "Master seed")->capture_default_str();
  pl->add_flag("--resume", plc.resume, "Reuse a matching model.ckpt from an earlier run");
  pl->add_flag("--quiet", pl_quiet, "No progress output");
  pl->callback([&] {
    action = [&] {
      plc.csv = pl_csv.get();
      if (!pl_quiet) plc.progress = [](const std::string& m) { std::cerr << m << "\n"; };
      const auto report = run_pipeline(plc);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << report.to_table();
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  auto classify = [](std::exception_ptr ep) -> int {
    try {
      std::rethrow_exception(ep);
    } catch (const ConfigError& e) {
      std::cerr << "configuration error: " << e.what() << "\n";
      return kConfig;
    } catch (const ParseError& e) {
      std::cerr << "parse error: " << e.what() << "\n";
      return kParse;
    } catch (const IoError& e) {
      std::cerr << "i/o error: " << e.what() << "\n";
      return kIo;
    } catch (const NumericError& e) {
      std::cerr << "numeric error: " << e.what() << "\n";
      return kNumeric;
    } catch (const ContractError& e) {
      std::cerr << "internal contract violation: " << e.what() << "\n";
      return kContract;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kInternal;
    }
  };

  try {
    action();
  } catch (const StageFailure& e) {
    std::cerr << e.what() << "\n";
    return classify(e.cause());
  } catch (...) {
    return classify(std::current_exception());
  }
  return kOk;
}

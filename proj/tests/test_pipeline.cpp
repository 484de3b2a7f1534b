#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "pelp/artifact.hpp"
#include "pelp/checkpoint.hpp"
#include "pelp/pipeline.hpp"
#include "pelp/synthetic.hpp"

using namespace pelp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pelp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PELP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PipelineConfig small_config(const fs::path& dir) {
  const auto log_path = dir / "input.txt";
  write_text(generate(family_spec("parallel", 2), 40), log_path);
  PipelineConfig c;
  c.input = log_path;
  c.input_is_text = true;
  c.hyper.window = {4, 2};
  c.hyper.hidden_size = 16;
  c.max_epochs = 3;
  c.baseline_runs = 5;
  c.seed = 9;
  c.out_dir = dir / "out";
  return c;
}

}  // namespace

TEST_CASE("pipeline writes every artifact and a fixed-order report") {
  const auto dir = scratch("pipeline");
  auto config = small_config(dir);
  const auto report = run_pipeline(config);
  for (const char* name : {"log.txt", "train.txt", "test.txt", "vocab.json", "pairs.bin", "model.ckpt", "train_log.csv",
                           "pred.txt", "report.json", "report.txt"}) {
    CHECK_MESSAGE(fs::exists(config.out_dir / name), name);
  }
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].method == "HighestFreq");
  CHECK(report.rows[1].method == "RandomPred");
  CHECK(report.rows[2].method == "WeightedProb");
  CHECK(report.rows[3].method == "PELP");
  CHECK_FALSE(report.rows[0].std);
  CHECK(report.rows[1].std);
  CHECK_FALSE(report.rows[3].std);
  CHECK(report.train_traces == 32);
  CHECK(report.test_traces == 8);
  CHECK(report.epochs == 3);

  // provenance: every artifact carries version, config hash and seed
  const auto stamp = make_stamp(config.canonical(), 9);
  for (const char* name : {"log.txt", "train.txt", "test.txt", "pairs.bin", "pred.txt"}) {
    CHECK(read_sidecar(config.out_dir / name) == stamp);
  }
  CHECK(read_checkpoint(config.out_dir / "model.ckpt").stamp == stamp);
  const auto vocab_json = nlohmann::json::parse(slurp(config.out_dir / "vocab.json"));
  CHECK(vocab_json["meta"]["config_hash"] == stamp.config_hash);
  const auto rep_json = nlohmann::json::parse(slurp(config.out_dir / "report.json"));
  CHECK(rep_json["meta"]["seed"] == 9);
  CHECK(rep_json["methods"][0]["rmse_std"].is_null());

  const auto table = slurp(config.out_dir / "report.txt");
  CHECK(table.find("Method") == 0);
  CHECK(table.find("±") != std::string::npos);

  SUBCASE("identical configuration gives byte-identical reports") {
    auto again = config;
    again.out_dir = dir / "again";
    run_pipeline(again);
    CHECK(slurp(again.out_dir / "report.json") == slurp(config.out_dir / "report.json"));
    CHECK(slurp(again.out_dir / "report.txt") == table);
    CHECK(slurp(again.out_dir / "pred.txt") == slurp(config.out_dir / "pred.txt"));
  }
  SUBCASE("resume reuses the checkpoint") {
    config.resume = true;
    const auto resumed = run_pipeline(config);
    CHECK(resumed.stop_reason == "resumed");
    CHECK(resumed.rows[3].mean.rmse == report.rows[3].mean.rmse);
    CHECK(resumed.epochs == report.epochs);
  }
  fs::remove_all(dir);
}

TEST_CASE("stage failures name the stage and the finished artifacts") {
  const auto dir = scratch("pipeline_fail");
  auto config = small_config(dir);
  config.hyper.window = {40, 2};
  try {
    run_pipeline(config);
    FAIL("expected a stage failure");
  } catch (const StageFailure& e) {
    CHECK(e.stage() == "pairs");
    CHECK(e.completed().size() >= 3);
    CHECK(std::string(e.what()).find("train.txt") != std::string::npos);
    CHECK_THROWS_AS(std::rethrow_exception(e.cause()), ConfigError);
  }
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  const auto d = dir.string();
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("pipeline --help") == 0);
  CHECK(run_cli("no-such-command") == 2);
  CHECK(run_cli("synth --family parallel --season 2 --out " + d + "/s.txt") == 0);
  CHECK(run_cli("synth --family parallel --season 9 --out " + d + "/s.txt") == 3);
  CHECK(run_cli("stats --log " + d + "/s.txt") == 0);

  std::ofstream(dir / "bad.txt") << "a b\n\nc\n";
  CHECK(run_cli("stats --log " + d + "/bad.txt") == 4);
  std::ofstream(dir / "raw.csv") << "case,timestamp,activity\n1,2020-01-01,a\n";
  CHECK(run_cli("preprocess --input " + d + "/raw.csv --output " + d + "/l.txt --act-col nope") == 3);
  CHECK(run_cli("preprocess --input " + d + "/raw.csv --output " + d + "/nodir/x/l.txt") == 5);
  CHECK(run_cli("preprocess --input " + d + "/raw.csv --output " + d + "/l.txt") == 0);
  CHECK(slurp(dir / "l.txt") == "a\n");

  CHECK(run_cli("pairs --log " + d + "/s.txt -p 4 -q 2 --vocab " + d + "/v.json --output " + d + "/p.bin") == 0);
  CHECK(run_cli("train --pairs " + d + "/p.bin --vocab " + d + "/v.json --hidden 16 --max-epochs 2 --quiet --out " + d +
                "/m.ckpt") == 0);
  CHECK(run_cli("train --pairs " + d + "/p.bin --vocab " + d + "/v.json --lr 0.9 --out " + d + "/m2.ckpt") == 3);
  CHECK(run_cli("predict --model " + d + "/m.ckpt --train " + d + "/s.txt --horizon 4 --out " + d + "/pred.txt") == 0);
  CHECK(run_cli("evaluate --pred " + d + "/pred.txt --truth " + d + "/s.txt") == 0);
  CHECK(run_cli("baseline --method weighted --train " + d + "/s.txt --truth " + d + "/s.txt --runs 3") == 0);
  CHECK(run_cli("autocorr --log " + d + "/s.txt --window 20 --max-lag 5 --out " + d + "/ac.csv") == 0);
  CHECK(run_cli("autocorr --log " + d + "/s.txt --window 500 --max-lag 5 --out " + d + "/ac.csv") == 3);
  fs::remove_all(dir);
}

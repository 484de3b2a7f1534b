#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pelp/error.hpp"
#include "pelp/hypersearch.hpp"
#include "pelp/synthetic.hpp"

using namespace pelp;

TEST_CASE("grid") {
  GridAxes axes{{0.01, 0.05}, {16, 32, 64}, {0.001}, {{3, 2}, {4, 2}}};
  const auto trials = grid(axes, 100);
  REQUIRE(trials.size() == 12);
  CHECK(trials[0].hyper.learning_rate == 0.01);
  CHECK(trials[0].hyper.window == WindowSpec{3, 2});
  CHECK(trials[1].hyper.window == WindowSpec{4, 2});
  CHECK(trials[2].hyper.hidden_size == 32);
  CHECK(trials[11].hyper.learning_rate == 0.05);
  for (std::size_t k = 0; k < trials.size(); ++k) {
    CHECK(trials[k].index == k);
    CHECK(trials[k].hyper.seed == 100 + k);
  }
  axes.learning_rates = {0.5};
  CHECK_THROWS_AS(grid(axes, 0), ConfigError);
  axes.learning_rates.clear();
  CHECK_THROWS_AS(grid(axes, 0), ConfigError);
}

TEST_CASE("random trials") {
  const SearchSpace space;
  const auto a = random_trials(space, 5, 42), b = random_trials(space, 5, 42);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a[i].hyper.learning_rate == b[i].hyper.learning_rate);
    CHECK(a[i].hyper.hidden_size == b[i].hyper.hidden_size);
    CHECK(a[i].hyper.window == b[i].hyper.window);
    CHECK(a[i].hyper.seed == 42 + i);
  }
  const auto many = random_trials(space, 10000, 1);
  CHECK(many.size() == 10000);
  std::size_t low_lr = 0;
  for (const auto& t : many) {
    CHECK_NOTHROW(t.hyper.validate());
    low_lr += t.hyper.learning_rate < 0.01;
  }
  // log-uniform: P(lr < 0.01) = ln(10) / ln(300), about 0.40
  CHECK(static_cast<double>(low_lr) / 10000.0 == doctest::Approx(std::log(10.0) / std::log(300.0)).epsilon(0.05));
  CHECK_THROWS_AS(random_trials(space, 0, 1), ConfigError);
  SearchSpace bad;
  bad.max_hidden = 2048;
  CHECK_THROWS_AS(random_trials(bad, 1, 1), ConfigError);
}

TEST_CASE("rank") {
  std::vector<TrialResult> rs(4);
  rs[0].index = 0, rs[0].ok = true, rs[0].rmse = 5, rs[0].mae = 1;
  rs[1].index = 1, rs[1].ok = true, rs[1].rmse = 3, rs[1].mae = 2;
  rs[2].index = 2, rs[2].ok = false;
  rs[3].index = 3, rs[3].ok = true, rs[3].rmse = 3, rs[3].mae = 1;
  const auto ranked = rank(rs);
  CHECK(ranked[0].index == 3);
  CHECK(ranked[1].index == 1);
  CHECK(ranked[2].index == 0);
  CHECK(ranked[3].index == 2);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(rs.begin(), rs.end(), rng);
    const auto again = rank(rs);
    for (std::size_t k = 0; k < 4; ++k) CHECK(again[k].index == ranked[k].index);
  }
}

TEST_CASE("results csv round trip") {
  TrialResult r;
  r.index = 7;
  r.hyper.learning_rate = 0.0123456789;
  r.hyper.window = {4, 2};
  r.ok = true;
  r.rmse = 0.1;
  r.mae = 1.0 / 3.0;
  r.message = "step 2, stopped";
  const auto path = std::filesystem::temp_directory_path() / "pelp_test_results.csv";
  std::ofstream(path, std::ios::binary | std::ios::trunc) << results_csv_header() << results_csv_row(r) << "8,0.1,16";
  const auto back = read_results_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].index == 7);
  CHECK(back[0].hyper.learning_rate == r.hyper.learning_rate);
  CHECK(back[0].mae == r.mae);
  CHECK(back[0].hyper.window == r.hyper.window);
  CHECK(back[0].message == "step 2; stopped");
  std::filesystem::remove(path);
}

TEST_CASE("run_search records failures, ranks, and resumes") {
  const auto log = generate(family_spec("skip", 2), 40);
  const auto train = log.slice(0, 32), test = log.slice(32, 8);
  GridAxes axes{{0.05}, {16}, {0.001}, {{4, 2}, {40, 2}}};
  const auto trials = grid(axes, 3);
  SearchOptions opt;
  opt.train.max_epochs = 3;
  const auto path = std::filesystem::temp_directory_path() / "pelp_test_search.csv";
  std::filesystem::remove(path);
  opt.report = path;
  const auto results = run_search(trials, train, test, opt);
  REQUIRE(results.size() == 2);
  CHECK(results[0].ok);
  CHECK(results[0].index == 0);
  CHECK_FALSE(results[1].ok);
  CHECK(results[1].message.find("needs at least") != std::string::npos);
  CHECK(read_results_csv(path).size() == 2);

  // a resumed search reruns nothing and keeps the file intact
  const auto before = std::filesystem::file_size(path);
  const auto resumed = run_search(trials, train, test, opt);
  CHECK(std::filesystem::file_size(path) == before);
  CHECK(resumed[0].rmse == results[0].rmse);

  SUBCASE("parallel trials give the same table") {
    std::filesystem::remove(path);
    opt.threads = 2;
    const auto par = run_search(trials, train, test, opt);
    CHECK(par[0].rmse == results[0].rmse);
    CHECK(par[0].best_loss == results[0].best_loss);
  }
  std::filesystem::remove(path);
}

TEST_CASE("single trial search") {
  const auto log = generate(family_spec("parallel", 2), 24);
  SearchOptions opt;
  opt.train.max_epochs = 2;
  const auto r = run_search(random_trials([] {
    SearchSpace s;
    s.max_hidden = 32;
    s.max_window = 3;
    return s;
  }(), 1, 5), log.slice(0, 20), log.slice(20, 4), opt);
  REQUIRE(r.size() == 1);
  CHECK(r[0].index == 0);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pelp/error.hpp"
#include "pelp/training.hpp"

using namespace pelp;

namespace {

// Replays a loss series through the stop rule; returns (stop epoch, best epoch).
std::pair<std::size_t, std::size_t> simulate(const std::vector<double>& losses, std::size_t patience,
                                             std::optional<std::size_t> max_epochs = std::nullopt,
                                             double zero = 0.0) {
  EarlyStopper s(patience, 0.0, zero, max_epochs);
  for (const double l : losses) {
    if (s.update(l)) return {s.epoch(), s.best_epoch()};
  }
  return {0, s.best_epoch()};
}

std::vector<TrainingPair> tiny_pairs() {
  return {{{2, 3, 1}, {4, 1}, 0}, {{3, 4, 1}, {2, 1}, 1}, {{4, 2, 1}, {3, 1}, 2}};
}

}  // namespace

TEST_CASE("stop rule") {
  std::vector<double> flat{3, 2};
  flat.resize(30, 2.0);
  CHECK(simulate(flat, 3) == std::pair<std::size_t, std::size_t>{5, 2});

  std::vector<double> dec;
  for (int i = 0; i < 20; ++i) dec.push_back(10.0 - i);
  CHECK(simulate(dec, 1, 10) == std::pair<std::size_t, std::size_t>{10, 10});

  CHECK(simulate({3, 2, 0, 5}, 100).first == 3);
  CHECK(simulate({3, 2, 4e-5}, 100, std::nullopt, 5e-5).first == 3);

  // never more than `patience` epochs past the best one
  std::vector<double> noisy{5, 4, 4.5, 3, 3.5, 3.2, 3.1, 3.3, 3.4, 3.6, 3.05};
  const auto [stop, best] = simulate(noisy, 4);
  CHECK(best == 4);
  CHECK(stop == 8);

  EarlyStopper delta(2, 0.5, 0.0, std::nullopt);
  delta.update(3.0);
  delta.update(2.8);  // not an improvement with min_delta 0.5
  CHECK(delta.best_epoch() == 1);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.patience_epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.min_delta = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(train(init_model(5, 8, 0.0, 1), {}, TrainConfig{}), ConfigError);
}

TEST_CASE("train returns the best epoch and replays its loss") {
  TrainConfig c;
  c.learning_rate = 0.1;
  c.max_epochs = 40;
  c.patience_epochs = 100;
  std::size_t improvements = 0;
  c.on_best = [&](const ModelState&, std::size_t, double) { ++improvements; };
  const auto pairs = tiny_pairs();
  const auto result = train(init_model(5, 16, 0.05, 3), pairs, c);
  CHECK(result.log.epochs.size() == 40);
  CHECK(result.log.stop == StopReason::MaxEpochs);
  double min_loss = std::numeric_limits<double>::infinity();
  for (const auto& e : result.log.epochs) min_loss = std::min(min_loss, e.loss);
  CHECK(result.log.best_loss == min_loss);
  CHECK(result.log.epochs[result.log.best_epoch - 1].loss == min_loss);
  CHECK(std::abs(mean_loss(result.model, pairs) - result.log.best_loss) <= 1e-12);
  CHECK(improvements >= 1);
  CHECK(result.log.best_loss < std::log(5.0));

  SUBCASE("deterministic for a fixed seed") {
    const auto again = train(init_model(5, 16, 0.05, 3), pairs, c);
    REQUIRE(again.log.epochs.size() == result.log.epochs.size());
    for (std::size_t i = 0; i < again.log.epochs.size(); ++i) CHECK(again.log.epochs[i].loss == result.log.epochs[i].loss);
    CHECK(again.model == result.model);
  }
}

TEST_CASE("train stops at zero loss") {
  TrainConfig c;
  c.learning_rate = 0.3;
  c.zero_loss = 0.05;
  c.max_epochs = 2000;
  const std::vector<TrainingPair> pairs{{{2, 1}, {3, 1}, 0}};
  const auto r = train(init_model(4, 16, 0.0, 1), pairs, c);
  CHECK(r.log.stop == StopReason::ZeroLoss);
  CHECK(r.log.epochs.back().loss <= 0.05);
  CHECK(r.log.best_epoch == r.log.epochs.size());
}

TEST_CASE("non-finite training aborts with the best model so far") {
  TrainConfig c;
  c.learning_rate = 1e300;
  c.max_epochs = 50;
  const auto pairs = tiny_pairs();
  const auto initial = init_model(5, 8, 0.0, 2);
  const auto r = train(initial, pairs, c);
  CHECK(r.log.stop == StopReason::NonFinite);
  CHECK_FALSE(r.log.failure.empty());
  CHECK(r.model.params.all_finite());
  CHECK(r.log.failure.find("epoch") != std::string::npos);
}

TEST_CASE("train log csv") {
  TrainLog log;
  log.epochs = {{1, 0.5, 0.25}, {2, 0.25, 0.5}};
  const auto path = std::filesystem::temp_directory_path() / "pelp_test_trainlog.csv";
  write_train_log(log, path);
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "epoch,loss,seconds");
  CHECK(first == "1,0.5,0.250000");
  std::filesystem::remove(path);
}

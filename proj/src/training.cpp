#include "pelp/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "pelp/error.hpp"

namespace pelp {

void TrainConfig::validate() const {
  if (patience_epochs < 1) throw ConfigError("patience must be at least 1");
  if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be non-negative");
  if (!(zero_loss >= 0.0)) throw ConfigError("zero-loss tolerance must be non-negative");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be finite and >= 0");
  if (max_epochs && *max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Patience: return "patience";
    case StopReason::ZeroLoss: return "zero-loss";
    case StopReason::MaxEpochs: return "max-epochs";
    case StopReason::NonFinite: return "non-finite";
  }
  return "unknown";
}

EarlyStopper::EarlyStopper(std::size_t patience, double min_delta, double zero_loss,
                           std::optional<std::size_t> max_epochs)
    : patience_(patience), min_delta_(min_delta), zero_loss_(zero_loss), max_epochs_(max_epochs) {}

bool EarlyStopper::update(double loss) {
  ++epoch_;
  improved_ = best_epoch_ == 0 || loss < best_loss_ - min_delta_;
  if (improved_) {
    best_epoch_ = epoch_;
    best_loss_ = loss;
  }
  stopped_ = true;
  if (loss <= zero_loss_) {
    reason_ = StopReason::ZeroLoss;
  } else if (epoch_ - best_epoch_ >= patience_) {
    reason_ = StopReason::Patience;
  } else if (max_epochs_ && epoch_ >= *max_epochs_) {
    reason_ = StopReason::MaxEpochs;
  } else {
    stopped_ = false;
  }
  return stopped_;
}

double mean_loss(const ModelState& model, const std::vector<TrainingPair>& pairs) {
  double total = 0.0;
  for (const auto& pair : pairs) total += evaluate_loss(model, pair);
  return total / static_cast<double>(pairs.size());
}

TrainResult train(ModelState model, const std::vector<TrainingPair>& pairs, const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw ConfigError("training needs at least one pair");

  TrainResult result{model, {}};
  EarlyStopper stopper(config.patience_epochs, config.min_delta, config.zero_loss, config.max_epochs);
  std::mt19937_64 dropout_rng(model.seed ^ 0x9e3779b97f4a7c15ull);

  for (;;) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t epoch = stopper.epoch() + 1;
    try {
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto fwd = forward_loss(model, pairs[i], &dropout_rng);
        if (!std::isfinite(fwd.loss)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", pair " + std::to_string(i));
        }
        try {
          sgd_step(model, backward(model, fwd.cache), config.learning_rate);
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", pair " +
                             std::to_string(i) + ")");
        }
      }
    } catch (const NumericError& e) {
      result.log.stop = StopReason::NonFinite;
      result.log.failure = e.what();
      break;
    }
    const double loss = mean_loss(model, pairs);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(loss)) {
      result.log.stop = StopReason::NonFinite;
      result.log.failure = "non-finite epoch loss at epoch " + std::to_string(epoch);
      break;
    }
    const bool stop = stopper.update(loss);
    result.log.epochs.push_back({epoch, loss, seconds});
    if (config.on_epoch) config.on_epoch(epoch, loss, seconds);
    if (stopper.improved()) {
      result.model = model;
      result.log.best_epoch = epoch;
      result.log.best_loss = loss;
      if (config.on_best) config.on_best(model, epoch, loss);
    }
    if (stop) {
      result.log.stop = stopper.reason().value_or(StopReason::MaxEpochs);
      break;
    }
  }
  return result;
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "epoch,loss,seconds\n";
  char buf[96];
  for (const auto& r : log.epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.6f\n", r.epoch, r.loss, r.seconds);
    out << buf;
  }
}

}  // namespace pelp

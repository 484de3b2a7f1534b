#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pelp/neural.hpp"

namespace pelp {

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t patience_epochs = 100;
  std::optional<std::size_t> max_epochs;
  double min_delta = 0.0;
  /// An epoch loss at or below this counts as zero. Cross-entropy under a
  /// softmax only approaches 0, so an exact comparison would never fire;
  /// 5e-5 is the largest value that still prints as 0.0000.
  double zero_loss = 5e-5;
  /// Called with the model every time the best loss improves (checkpointing).
  std::function<void(const ModelState&, std::size_t epoch, double loss)> on_best;
  /// Called after every epoch; for progress output.
  std::function<void(std::size_t epoch, double loss, double seconds)> on_epoch;

  void validate() const;
};

enum class StopReason { Patience, ZeroLoss, MaxEpochs, NonFinite };
std::string to_string(StopReason reason);

/// The stop rule on its own, epochs counted from 1.
class EarlyStopper {
 public:
  EarlyStopper(std::size_t patience, double min_delta, double zero_loss, std::optional<std::size_t> max_epochs);

  /// Records the loss of the next epoch. Returns true when training must stop.
  bool update(double loss);

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }
  bool improved() const noexcept { return improved_; }
  std::optional<StopReason> reason() const noexcept {
    return stopped_ ? std::optional(reason_) : std::nullopt;
  }

 private:
  std::size_t patience_;
  double min_delta_;
  double zero_loss_;
  std::optional<std::size_t> max_epochs_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  bool improved_ = false;
  StopReason reason_ = StopReason::MaxEpochs;
  bool stopped_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 when no epoch completed
  double best_loss = 0.0;
  StopReason stop = StopReason::MaxEpochs;
  std::string failure;  // diagnostic when stop == NonFinite
};

struct TrainResult {
  ModelState model;  // parameters of the best epoch
  TrainLog log;
};

/// Mean inference-mode loss over the pairs.
double mean_loss(const ModelState& model, const std::vector<TrainingPair>& pairs);

/// Pure SGD, one update per pair, pairs in the given order. After each epoch
/// the recorded loss is the inference-mode mean over all pairs, so replaying
/// the returned model reproduces it. A non-finite gradient or loss ends
/// training with StopReason::NonFinite and the best model so far.
TrainResult train(ModelState model, const std::vector<TrainingPair>& pairs, const TrainConfig& config);

/// CSV with columns epoch,loss,seconds.
void write_train_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace pelp

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpe::trainsearch {

enum class StopReason { max_epochs, patience, diverged };

std::string stop_reason_name(StopReason reason);
StopReason parse_stop_reason(const std::string& text);

struct ScheduleConfig {
  std::size_t max_epochs = 500;
  std::size_t patience = 10;
  double initial_lr = 1e-3;
  double lr_factor = 0.1;
  /// Improvement margin for the learning-rate plateau counter.
  double min_delta = 1e-4;
  /// Improvement margin for the early-stopping counter.
  double stop_min_delta = 0.0;

  void validate() const;
};

struct ScheduleDecision {
  bool improved = false;  // new best for early stopping and weight restore
  bool decay_lr = false;
  bool stop = false;
};

// Two independent plateau monitors over the validation error.
//
// Early stopping: an epoch improves when error < best - stop_min_delta. After
// `patience` consecutive epochs without improvement, training stops.
//
// LR decay: an epoch improves when error < lr_best - min_delta. After
// `patience` consecutive epochs without such improvement, the rate is
// multiplied by lr_factor and that counter restarts from zero.
//
// Both are updated every epoch, so a constant error sequence decays and stops
// on the same epoch (patience + 1).
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const ScheduleConfig& cfg);

  ScheduleDecision step(double val_error);

  double best() const { return stop_best_; }

 private:
  ScheduleConfig cfg_;
  double stop_best_ = std::numeric_limits<double>::infinity();
  double lr_best_ = std::numeric_limits<double>::infinity();
  std::size_t stop_wait_ = 0;
  std::size_t lr_wait_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_error = 0.0;
  double learning_rate = 0.0;  // rate used during this epoch
  bool lr_decayed = false;     // a decay was triggered at the end of this epoch
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::max_epochs;
  std::size_t best_epoch = 0;  // 0 when no epoch completed
  bool operator==(const TrainHistory&) const = default;
};

/// Training aborted on a non-finite loss or activation.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, TrainHistory history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

struct EpochOutcome {
  double train_loss = 0.0;
  double val_error = 0.0;
};

/// Runs epochs until the scheduler stops or max_epochs is reached. `run_epoch`
/// trains one epoch at the given rate and reports its losses; `on_improved`
/// fires after every epoch that sets a new best validation error. A
/// non-finite loss or an engine NumericError raises TrainingDiverged.
TrainHistory run_schedule(const ScheduleConfig& cfg,
                          const std::function<EpochOutcome(std::size_t epoch, double lr)>& run_epoch,
                          const std::function<void(std::size_t epoch)>& on_improved = {},
                          const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace hpe::trainsearch

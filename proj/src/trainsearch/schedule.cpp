#include "hpe/trainsearch/schedule.hpp"

#include <cmath>

#include "hpe/engine/tensor.hpp"

namespace hpe::trainsearch {

std::string stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::max_epochs: return "max_epochs";
    case StopReason::patience: return "patience";
    case StopReason::diverged: return "diverged";
  }
  return "diverged";
}

StopReason parse_stop_reason(const std::string& text) {
  if (text == "max_epochs") return StopReason::max_epochs;
  if (text == "patience") return StopReason::patience;
  if (text == "diverged") return StopReason::diverged;
  throw std::invalid_argument("unknown stop reason '" + text + "'");
}

void ScheduleConfig::validate() const {
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (patience == 0) throw std::invalid_argument("patience must be positive");
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw std::invalid_argument("initial_lr must be positive");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw std::invalid_argument("lr_factor must be in (0, 1)");
  if (!(min_delta >= 0.0) || !(stop_min_delta >= 0.0)) throw std::invalid_argument("min_delta must be non-negative");
}

PlateauScheduler::PlateauScheduler(const ScheduleConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

ScheduleDecision PlateauScheduler::step(double val_error) {
  ScheduleDecision d;
  if (val_error < stop_best_ - cfg_.stop_min_delta) {
    stop_best_ = val_error;
    stop_wait_ = 0;
    d.improved = true;
  } else if (++stop_wait_ >= cfg_.patience) {
    d.stop = true;
  }

  if (val_error < lr_best_ - cfg_.min_delta) {
    lr_best_ = val_error;
    lr_wait_ = 0;
  } else if (++lr_wait_ >= cfg_.patience) {
    d.decay_lr = true;
    lr_wait_ = 0;
  }
  return d;
}

TrainHistory run_schedule(const ScheduleConfig& cfg,
                          const std::function<EpochOutcome(std::size_t epoch, double lr)>& run_epoch,
                          const std::function<void(std::size_t epoch)>& on_improved,
                          const std::function<void(const EpochRecord&)>& on_epoch) {
  PlateauScheduler scheduler(cfg);
  TrainHistory history;
  double lr = cfg.initial_lr;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochOutcome outcome;
    try {
      outcome = run_epoch(epoch, lr);
    } catch (const engine::NumericError& e) {
      history.stop_reason = StopReason::diverged;
      throw TrainingDiverged("epoch " + std::to_string(epoch) + ": " + e.what(), history);
    }
    if (!std::isfinite(outcome.train_loss) || !std::isfinite(outcome.val_error)) {
      history.stop_reason = StopReason::diverged;
      throw TrainingDiverged("epoch " + std::to_string(epoch) + ": non-finite loss", history);
    }
    const ScheduleDecision d = scheduler.step(outcome.val_error);
    history.epochs.push_back({epoch, outcome.train_loss, outcome.val_error, lr, d.decay_lr});
    if (d.improved) {
      history.best_epoch = epoch;
      if (on_improved) on_improved(epoch);
    }
    if (on_epoch) on_epoch(history.epochs.back());
    if (d.stop) {
      history.stop_reason = StopReason::patience;
      return history;
    }
    if (d.decay_lr) lr *= cfg.lr_factor;
  }
  history.stop_reason = StopReason::max_epochs;
  return history;
}

}  // namespace hpe::trainsearch

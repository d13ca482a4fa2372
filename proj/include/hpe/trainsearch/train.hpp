#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "hpe/arch/architecture.hpp"
#include "hpe/augment/augment.hpp"
#include "hpe/datapipe/sample.hpp"
#include "hpe/engine/network.hpp"
#include "hpe/trainsearch/schedule.hpp"

namespace hpe::trainsearch {

using datapipe::Sample;

/// Network outputs are degrees / kLabelScale.
inline constexpr double kLabelScale = 100.0;

struct TrainConfig {
  std::size_t batch_size = 128;
  ScheduleConfig schedule;
  std::uint64_t seed = 0;
  augment::AugmentConfig augment;
  /// Samples per forward pass during evaluation; does not affect results.
  std::size_t eval_batch_size = 256;

  void validate() const;
};

/// Shortened run for CI and laptops: 30 epochs, otherwise unchanged.
TrainConfig desk_scale(TrainConfig cfg);

struct EvalReport {
  double mae_tilt = 0.0;
  double mae_pan = 0.0;
  double mean_error = 0.0;
};

/// (tilt, pan) in degrees for every sample, in input order.
std::vector<std::array<double, 2>> predict_degrees(const engine::Network<float>& net,
                                                   const std::vector<Sample>& samples, std::size_t batch_size = 256);

/// Mean absolute tilt and pan errors in degrees and their average.
EvalReport evaluate(const engine::Network<float>& net, const std::vector<Sample>& samples,
                    std::size_t batch_size = 256);

struct Partitions {
  std::vector<Sample> train, val, test;
};

struct TrainResult {
  engine::Network<float> network;  // weights of the best validation epoch
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on MSE over balanced, augmented batches; validation mean error drives
/// the plateau scheduler. Throws TrainingDiverged with the partial history.
TrainResult train(engine::Network<float> initial, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Builds the network from `spec` with a seed derived from cfg.seed, then trains.
TrainResult train(const arch::ArchitectureSpec& spec, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// B x 1 x 64 x 64 input tensor from sample images.
engine::Tensor<float> image_batch(const std::vector<const datapipe::Image*>& images);

}  // namespace hpe::trainsearch

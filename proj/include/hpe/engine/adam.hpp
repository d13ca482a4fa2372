#pragma once

#include <cstdint>
#include <vector>

#include "hpe/engine/network.hpp"

namespace hpe::engine {

/// Bias-corrected Adam. Moments are zero-filled on the first step.
template <typename T>
struct AdamState {
  std::uint64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::vector<LayerParams<T>> first_moment;
  std::vector<LayerParams<T>> second_moment;
};

template <typename T>
void adam_step(std::vector<LayerParams<T>>& params, const GradientSet<T>& grads, AdamState<T>& state);

}  // namespace hpe::engine

#pragma once

// Central finite-difference oracle for engine gradients. Uses only
// Network::forward and mse_loss, never the backward kernels.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hpe/engine/network.hpp"

namespace hpe::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Perturbations that moved a max-pool winner; the loss is not
  // differentiable across those, so central differences are not an oracle there.
  std::size_t skipped_at_kinks = 0;
};

/// Winning cells of every max-pool layer, used to detect kinks.
inline std::vector<std::vector<std::uint32_t>> pool_winners(const engine::Network<double>& net,
                                                            const engine::Tensor<double>& in) {
  std::vector<std::vector<std::uint32_t>> winners;
  engine::Tensor<double> x = in;
  for (const auto& layer : net.layers()) {
    switch (layer.kind) {
      case engine::LayerKind::conv3x3_tanh:
        x = engine::conv3x3_forward(x, net.params()[layer.param_index]);
        engine::tanh_inplace(x);
        break;
      case engine::LayerKind::maxpool2x2: {
        auto pooled = engine::maxpool2x2_forward(x);
        winners.push_back(std::move(pooled.argmax));
        x = std::move(pooled.output);
        break;
      }
      default:
        return winners;  // nothing after flatten pools
    }
  }
  return winners;
}

inline double relative_error(double analytic, double numeric) {
  // Floor keeps the ratio meaningful where both sides are at roundoff level.
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

inline double loss_of(const engine::Network<double>& net, const engine::Tensor<double>& in,
                      const engine::Tensor<double>& target) {
  return engine::mse_loss(net.forward(in), target);
}

/// Checks every scalar of tensors up to `dense_limit` entries, and a random
/// sample of `sample_count` entries of larger ones (plus the first and last).
inline GradCheckResult finite_difference_check(engine::Network<double> net, const engine::Tensor<double>& in,
                                               const engine::Tensor<double>& target, std::uint64_t seed,
                                               double step = 1e-4, std::size_t dense_limit = 800,
                                               std::size_t sample_count = 64) {
  const auto analytic = engine::backprop(net, in, target).grads;
  const auto base_winners = pool_winners(net, in);
  std::mt19937_64 rng(seed);
  GradCheckResult result;

  auto check_tensor = [&](engine::Tensor<double>& param, const engine::Tensor<double>& grad) {
    std::vector<std::size_t> indices;
    if (param.size() <= dense_limit) {
      for (std::size_t i = 0; i < param.size(); ++i) indices.push_back(i);
    } else {
      indices = {0, param.size() - 1};
      std::uniform_int_distribution<std::size_t> pick(0, param.size() - 1);
      for (std::size_t i = 0; i < sample_count; ++i) indices.push_back(pick(rng));
    }
    for (std::size_t idx : indices) {
      const double saved = param[idx];
      param[idx] = saved + step;
      const double up = loss_of(net, in, target);
      const bool kink_up = pool_winners(net, in) != base_winners;
      param[idx] = saved - step;
      const double down = loss_of(net, in, target);
      const bool kink_down = pool_winners(net, in) != base_winners;
      param[idx] = saved;
      if (kink_up || kink_down) {
        ++result.skipped_at_kinks;
        continue;
      }
      const double numeric = (up - down) / (2.0 * step);
      result.max_relative_error = std::max(result.max_relative_error, relative_error(grad[idx], numeric));
      ++result.checked;
    }
  };

  for (std::size_t l = 0; l < net.params().size(); ++l) {
    check_tensor(net.params()[l].weights, analytic.layers[l].weights);
    check_tensor(net.params()[l].bias, analytic.layers[l].bias);
  }
  return result;
}

/// Random conv/pool/dense stack: 1..max_blocks blocks of <= max_filters
/// filters, 1..2 hidden tanh layers of <= max_dense units, 2-unit head.
inline engine::Network<double> random_network(std::mt19937_64& rng, std::size_t max_blocks = 3,
                                              std::size_t max_filters = 8, std::size_t max_dense = 32,
                                              std::size_t side = 64) {
  auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  engine::Network<double> net({1, side, side});
  const std::size_t blocks = uniform_int(1, max_blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    net.add_conv3x3_tanh(uniform_int(1, max_filters));
    net.add_maxpool2x2();
  }
  net.add_flatten();
  const std::size_t hidden = uniform_int(1, 2);
  for (std::size_t h = 0; h < hidden; ++h) net.add_dense(uniform_int(1, max_dense), engine::Activation::tanh);
  net.add_dense(2, engine::Activation::linear);
  std::uniform_real_distribution<double> weight(-0.5, 0.5);
  for (auto& p : net.params()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.in_dim() * (p.weights.rank() == 4 ? 9 : 1)));
    for (auto& w : p.weights.values()) w = weight(rng) * 2.0 * scale;
    for (auto& b : p.bias.values()) b = weight(rng) * 0.2;
  }
  return net;
}

inline engine::Tensor<double> random_tensor(std::mt19937_64& rng, engine::Shape shape, double lo, double hi) {
  engine::Tensor<double> t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace hpe::testing

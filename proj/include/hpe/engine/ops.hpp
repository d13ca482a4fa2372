#pragma once

#include <cstdint>
#include <vector>

#include "hpe/engine/tensor.hpp"

namespace hpe::engine {

enum class ParamKind { conv3x3, dense };
enum class Activation { tanh, linear };

/// Weights and bias of one parametric layer.
///   conv3x3: weights (out_channels, in_channels, 3, 3), bias (out_channels)
///   dense:   weights (out_units, in_units),            bias (out_units)
template <typename T>
struct LayerParams {
  ParamKind kind = ParamKind::dense;
  Tensor<T> weights;
  Tensor<T> bias;

  static LayerParams conv(std::size_t in_channels, std::size_t out_channels) {
    return {ParamKind::conv3x3, Tensor<T>({out_channels, in_channels, 3, 3}), Tensor<T>({out_channels})};
  }
  static LayerParams dense(std::size_t in_units, std::size_t out_units) {
    return {ParamKind::dense, Tensor<T>({out_units, in_units}), Tensor<T>({out_units})};
  }

  std::size_t in_dim() const { return weights.dim(1); }
  std::size_t out_dim() const { return weights.dim(0); }
  std::size_t scalar_count() const { return weights.size() + bias.size(); }

  /// Throws ShapeError unless the weight/bias shapes match `kind`.
  void validate() const;

  bool operator==(const LayerParams&) const = default;
};

template <typename T>
struct PoolOutput {
  Tensor<T> output;
  /// Flat index into the pooled input of the winning cell, one per output cell.
  std::vector<std::uint32_t> argmax;
};

// Every spatial op accepts a single sample (C×H×W) or a batch (B×C×H×W) and
// returns a tensor of the same rank. Dense ops accept (in) or (B×in).

/// Same-padded (1 pixel of zeros), stride-1 3x3 convolution plus bias.
template <typename T>
Tensor<T> conv3x3_forward(const Tensor<T>& input, const LayerParams<T>& params);

/// Accumulates dL/dW and dL/db into `grads`; writes dL/dx into `grad_input` when non-null.
template <typename T>
void conv3x3_backward(const Tensor<T>& input, const Tensor<T>& grad_output, const LayerParams<T>& params,
                      LayerParams<T>& grads, Tensor<T>* grad_input);

/// 2x2 max pooling, stride 2, output extent ceil(n/2); edge windows shrink on odd extents.
template <typename T>
PoolOutput<T> maxpool2x2_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_output, const std::vector<std::uint32_t>& argmax,
                              const Shape& input_shape);

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const LayerParams<T>& params, Activation activation);

/// `grad_preact` is dL/d(Wx+b), i.e. after the activation derivative has been applied.
template <typename T>
void dense_backward(const Tensor<T>& input, const Tensor<T>& grad_preact, const LayerParams<T>& params,
                    LayerParams<T>& grads, Tensor<T>* grad_input);

/// In-place tanh.
template <typename T>
void tanh_inplace(Tensor<T>& t);

/// grad *= 1 - y^2, with y the tanh output.
template <typename T>
void tanh_backward_inplace(const Tensor<T>& tanh_output, Tensor<T>& grad);

/// Mean over all entries of the squared difference.
template <typename T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

/// d(mse)/d(pred) = 2 (pred - target) / n.
template <typename T>
Tensor<T> mse_loss_grad(const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace hpe::engine

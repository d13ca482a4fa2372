#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "hpe/engine/ops.hpp"
#include "hpe/engine/tensor.hpp"

namespace hpe::engine {

enum class LayerKind { conv3x3_tanh, maxpool2x2, flatten, dense_tanh, dense_linear };

/// Per-sample activation extent. Flattened activations are (n, 1, 1).
struct ActivationShape {
  std::size_t channels = 1, height = 1, width = 1;
  std::size_t size() const { return channels * height * width; }
  bool operator==(const ActivationShape&) const = default;
};

struct Layer {
  static constexpr std::size_t kNoParams = std::numeric_limits<std::size_t>::max();
  LayerKind kind;
  std::size_t param_index = kNoParams;
  ActivationShape in, out;
};

/// One gradient tensor pair per parametric layer, congruent with Network::params().
template <typename T>
struct GradientSet {
  std::vector<LayerParams<T>> layers;
};

/// Feed-forward stack of conv3x3+tanh / maxpool2x2 / flatten / dense layers.
template <typename T>
class Network {
 public:
  explicit Network(ActivationShape input = {1, 64, 64}) : input_(input) {}

  /// Adds a conv layer with zero-initialized parameters.
  void add_conv3x3_tanh(std::size_t filters);
  void add_maxpool2x2();
  void add_flatten();
  void add_dense(std::size_t units, Activation activation);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<LayerParams<T>>& params() { return params_; }
  const std::vector<LayerParams<T>>& params() const { return params_; }
  ActivationShape input_shape() const { return input_; }
  ActivationShape output_shape() const { return layers_.empty() ? input_ : layers_.back().out; }

  std::size_t parameter_count() const;

  /// Throws ShapeError unless the stack ends in a 2-unit linear dense layer.
  void validate_head() const;

  /// `batch` is B×C×H×W (or a single C×H×W sample); returns B×outputs.
  Tensor<T> forward(const Tensor<T>& batch) const;

  GradientSet<T> zero_gradients() const;

  template <typename U>
  Network<U> cast() const {
    Network<U> out(input_);
    for (const auto& layer : layers_) out.append_layer_descriptor(layer);
    for (const auto& p : params_) {
      out.params().push_back({p.kind, tensor_cast<U>(p.weights), tensor_cast<U>(p.bias)});
    }
    return out;
  }

  bool operator==(const Network&) const = default;

  // Used by cast(); keeps descriptor bookkeeping in one place.
  void append_layer_descriptor(const Layer& layer) { layers_.push_back(layer); }

 private:
  ActivationShape input_;
  std::vector<Layer> layers_;
  std::vector<LayerParams<T>> params_;
};

bool operator==(const Layer& a, const Layer& b);

template <typename T>
struct BackpropResult {
  T loss;
  GradientSet<T> grads;
};

/// Loss and exact parameter gradients of mse_loss(forward(batch_in), batch_target).
/// Throws NumericError naming the first layer whose activations are not finite.
template <typename T>
BackpropResult<T> backprop(const Network<T>& net, const Tensor<T>& batch_in, const Tensor<T>& batch_target);

}  // namespace hpe::engine

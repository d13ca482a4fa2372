#include "hpe/engine/network.hpp"

#include <cmath>
#include <string>

namespace hpe::engine {

bool operator==(const Layer& a, const Layer& b) {
  return a.kind == b.kind && a.param_index == b.param_index && a.in == b.in && a.out == b.out;
}

template <typename T>
void Network<T>::add_conv3x3_tanh(std::size_t filters) {
  const ActivationShape in = output_shape();
  if (filters == 0) throw ShapeError("conv3x3: filter count must be positive");
  if (in.height == 1 && in.width == 1 && !layers_.empty() && layers_.back().kind != LayerKind::maxpool2x2 &&
      layers_.back().kind != LayerKind::conv3x3_tanh) {
    throw ShapeError("conv3x3 cannot follow a flatten or dense layer");
  }
  params_.push_back(LayerParams<T>::conv(in.channels, filters));
  layers_.push_back({LayerKind::conv3x3_tanh, params_.size() - 1, in, {filters, in.height, in.width}});
}

template <typename T>
void Network<T>::add_maxpool2x2() {
  const ActivationShape in = output_shape();
  layers_.push_back({LayerKind::maxpool2x2, Layer::kNoParams, in,
                     {in.channels, (in.height + 1) / 2, (in.width + 1) / 2}});
}

template <typename T>
void Network<T>::add_flatten() {
  const ActivationShape in = output_shape();
  layers_.push_back({LayerKind::flatten, Layer::kNoParams, in, {in.size(), 1, 1}});
}

template <typename T>
void Network<T>::add_dense(std::size_t units, Activation activation) {
  const ActivationShape in = output_shape();
  if (units == 0) throw ShapeError("dense: unit count must be positive");
  if (in.height != 1 || in.width != 1) throw ShapeError("dense layer requires a flattened input");
  params_.push_back(LayerParams<T>::dense(in.channels, units));
  const auto kind = activation == Activation::tanh ? LayerKind::dense_tanh : LayerKind::dense_linear;
  layers_.push_back({kind, params_.size() - 1, in, {units, 1, 1}});
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.scalar_count();
  return n;
}

template <typename T>
void Network<T>::validate_head() const {
  if (layers_.empty() || layers_.back().kind != LayerKind::dense_linear || layers_.back().out.channels != 2) {
    throw ShapeError("network must end in a linear dense layer with 2 units");
  }
}

template <typename T>
GradientSet<T> Network<T>::zero_gradients() const {
  GradientSet<T> g;
  g.layers.reserve(params_.size());
  for (const auto& p : params_) g.layers.push_back({p.kind, Tensor<T>(p.weights.shape()), Tensor<T>(p.bias.shape())});
  return g;
}

namespace {

template <typename T>
Tensor<T> as_batch(const Tensor<T>& batch, const ActivationShape& input) {
  if (batch.rank() == 3) return batch.reshaped({1, batch.dim(0), batch.dim(1), batch.dim(2)});
  if (batch.rank() != 4 || batch.dim(1) != input.channels || batch.dim(2) != input.height ||
      batch.dim(3) != input.width) {
    throw ShapeError("network input must be B×" + std::to_string(input.channels) + "×" +
                     std::to_string(input.height) + "×" + std::to_string(input.width) + ", got " +
                     shape_to_string(batch.shape()));
  }
  return batch;
}

template <typename T>
void check_finite(const Tensor<T>& t, std::size_t layer_index) {
  for (const T v : t.values()) {
    if (!std::isfinite(v)) {
      throw NumericError(layer_index, "non-finite activation at layer " + std::to_string(layer_index));
    }
  }
}

// Runs layer `i` forward. Pool argmax is written to `argmax` when present.
template <typename T>
Tensor<T> layer_forward(const Network<T>& net, std::size_t i, const Tensor<T>& x, std::vector<std::uint32_t>* argmax) {
  const Layer& layer = net.layers()[i];
  const std::size_t batch = x.dim(0);
  switch (layer.kind) {
    case LayerKind::conv3x3_tanh: {
      Tensor<T> y = conv3x3_forward(x, net.params()[layer.param_index]);
      tanh_inplace(y);
      return y;
    }
    case LayerKind::maxpool2x2: {
      PoolOutput<T> pooled = maxpool2x2_forward(x);
      if (argmax) *argmax = std::move(pooled.argmax);
      return std::move(pooled.output);
    }
    case LayerKind::flatten:
      return x.reshaped({batch, layer.out.channels});
    case LayerKind::dense_tanh:
      return dense_forward(x, net.params()[layer.param_index], Activation::tanh);
    case LayerKind::dense_linear:
      return dense_forward(x, net.params()[layer.param_index], Activation::linear);
  }
  throw ShapeError("unknown layer kind");
}

}  // namespace

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& batch) const {
  Tensor<T> x = as_batch(batch, input_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layer_forward(*this, i, x, nullptr);
    check_finite(x, i);
  }
  return x;
}

template <typename T>
BackpropResult<T> backprop(const Network<T>& net, const Tensor<T>& batch_in, const Tensor<T>& batch_target) {
  const auto& layers = net.layers();
  // activations[i] is the input of layer i; activations.back() is the prediction.
  std::vector<Tensor<T>> activations;
  std::vector<std::vector<std::uint32_t>> argmax(layers.size());
  activations.reserve(layers.size() + 1);
  activations.push_back(as_batch(batch_in, net.input_shape()));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    activations.push_back(layer_forward(net, i, activations.back(), &argmax[i]));
    check_finite(activations.back(), i);
  }

  const Tensor<T>& pred = activations.back();
  BackpropResult<T> result{mse_loss(pred, batch_target), net.zero_gradients()};
  Tensor<T> grad = mse_loss_grad(pred, batch_target);
  Tensor<T> grad_in;

  for (std::size_t i = layers.size(); i-- > 0;) {
    const Layer& layer = layers[i];
    const Tensor<T>& x = activations[i];
    const bool need_input_grad = i > 0;
    switch (layer.kind) {
      case LayerKind::conv3x3_tanh:
        tanh_backward_inplace(activations[i + 1], grad);
        conv3x3_backward(x, grad, net.params()[layer.param_index], result.grads.layers[layer.param_index],
                         need_input_grad ? &grad_in : nullptr);
        break;
      case LayerKind::maxpool2x2:
        grad_in = maxpool2x2_backward(grad, argmax[i], x.shape());
        break;
      case LayerKind::flatten:
        grad_in = grad.reshaped(x.shape());
        break;
      case LayerKind::dense_tanh:
        tanh_backward_inplace(activations[i + 1], grad);
        [[fallthrough]];
      case LayerKind::dense_linear:
        dense_backward(x, grad, net.params()[layer.param_index], result.grads.layers[layer.param_index],
                       need_input_grad ? &grad_in : nullptr);
        break;
    }
    if (need_input_grad) std::swap(grad, grad_in);
  }
  return result;
}

template class Network<float>;
template class Network<double>;
template BackpropResult<float> backprop(const Network<float>&, const Tensor<float>&, const Tensor<float>&);
template BackpropResult<double> backprop(const Network<double>&, const Tensor<double>&, const Tensor<double>&);

}  // namespace hpe::engine

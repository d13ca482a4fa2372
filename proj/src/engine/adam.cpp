#include "hpe/engine/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hpe::engine {

namespace {

template <typename T>
void zeros_like(const std::vector<LayerParams<T>>& params, std::vector<LayerParams<T>>& out) {
  out.clear();
  for (const auto& p : params) out.push_back({p.kind, Tensor<T>(p.weights.shape()), Tensor<T>(p.bias.shape())});
}

template <typename T>
void update(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& m, Tensor<T>& v, const AdamState<T>& s,
            double correction1, double correction2) {
  if (param.shape() != grad.shape() || param.shape() != m.shape()) {
    throw ShapeError("adam_step: gradient " + shape_to_string(grad.shape()) + " does not match parameter " +
                     shape_to_string(param.shape()));
  }
  const T b1 = static_cast<T>(s.beta1);
  const T b2 = static_cast<T>(s.beta2);
  const T lr = static_cast<T>(s.learning_rate);
  const T eps = static_cast<T>(s.epsilon);
  const T c1 = static_cast<T>(correction1);
  const T c2 = static_cast<T>(correction2);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const T g = grad[i];
    m[i] = b1 * m[i] + (T{1} - b1) * g;
    v[i] = b2 * v[i] + (T{1} - b2) * g * g;
    const T m_hat = m[i] / c1;
    const T v_hat = v[i] / c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace

template <typename T>
void adam_step(std::vector<LayerParams<T>>& params, const GradientSet<T>& grads, AdamState<T>& state) {
  if (state.learning_rate <= 0.0) throw std::invalid_argument("adam_step: learning rate must be positive");
  if (grads.layers.size() != params.size()) throw ShapeError("adam_step: gradient set does not match parameters");
  if (state.step_count == 0 || state.first_moment.size() != params.size()) {
    zeros_like(params, state.first_moment);
    zeros_like(params, state.second_moment);
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weights, grads.layers[l].weights, state.first_moment[l].weights, state.second_moment[l].weights,
           state, correction1, correction2);
    update(params[l].bias, grads.layers[l].bias, state.first_moment[l].bias, state.second_moment[l].bias, state,
           correction1, correction2);
  }
}

template void adam_step(std::vector<LayerParams<float>>&, const GradientSet<float>&, AdamState<float>&);
template void adam_step(std::vector<LayerParams<double>>&, const GradientSet<double>&, AdamState<double>&);

}  // namespace hpe::engine

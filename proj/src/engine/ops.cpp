#include "hpe/engine/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace hpe::engine {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// Upper bound on im2col columns per GEMM; bounds scratch memory for large batches.
constexpr std::size_t kMaxColumns = 8192;

struct SpatialDims {
  std::size_t batch, channels, height, width;
  std::size_t plane() const { return height * width; }
};

template <typename T>
SpatialDims spatial_dims(const Tensor<T>& t, const char* op) {
  if (t.rank() == 3) return {1, t.dim(0), t.dim(1), t.dim(2)};
  if (t.rank() == 4) return {t.dim(0), t.dim(1), t.dim(2), t.dim(3)};
  throw ShapeError(std::string(op) + ": expected C×H×W or B×C×H×W, got " + shape_to_string(t.shape()));
}

Shape spatial_shape(bool batched, const SpatialDims& d) {
  if (batched) return {d.batch, d.channels, d.height, d.width};
  return {d.channels, d.height, d.width};
}

// Rows: (ci, ky, kx); columns: (sample j, y, x) for samples [first, first + count).
template <typename T>
void im2col(const T* input, const SpatialDims& d, std::size_t first, std::size_t count, RowMat<T>& cols) {
  const std::size_t hw = d.plane();
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  cols.resize(static_cast<Eigen::Index>(d.channels * 9), static_cast<Eigen::Index>(count * hw));
  for (std::size_t ci = 0; ci < d.channels; ++ci) {
    for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
      for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
        T* row = cols.row(static_cast<Eigen::Index>(ci * 9 + ky * 3 + kx)).data();
        for (std::size_t j = 0; j < count; ++j) {
          const T* src = input + ((first + j) * d.channels + ci) * hw;
          for (std::ptrdiff_t y = 0; y < h; ++y) {
            T* dst = row + j * hw + static_cast<std::size_t>(y * w);
            const std::ptrdiff_t sy = y + ky - 1;
            if (sy < 0 || sy >= h) {
              std::fill(dst, dst + w, T{0});
              continue;
            }
            const T* src_row = src + sy * w;
            for (std::ptrdiff_t x = 0; x < w; ++x) {
              const std::ptrdiff_t sx = x + kx - 1;
              dst[x] = (sx >= 0 && sx < w) ? src_row[sx] : T{0};
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const RowMat<T>& cols, const SpatialDims& d, std::size_t first, std::size_t count, T* grad_input) {
  const std::size_t hw = d.plane();
  const auto h = static_cast<std::ptrdiff_t>(d.height);
  const auto w = static_cast<std::ptrdiff_t>(d.width);
  for (std::size_t ci = 0; ci < d.channels; ++ci) {
    for (std::ptrdiff_t ky = 0; ky < 3; ++ky) {
      for (std::ptrdiff_t kx = 0; kx < 3; ++kx) {
        const T* row = cols.row(static_cast<Eigen::Index>(ci * 9 + ky * 3 + kx)).data();
        for (std::size_t j = 0; j < count; ++j) {
          T* dst = grad_input + ((first + j) * d.channels + ci) * hw;
          for (std::ptrdiff_t y = 0; y < h; ++y) {
            const std::ptrdiff_t sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            const T* src = row + j * hw + static_cast<std::size_t>(y * w);
            T* dst_row = dst + sy * w;
            for (std::ptrdiff_t x = 0; x < w; ++x) {
              const std::ptrdiff_t sx = x + kx - 1;
              if (sx >= 0 && sx < w) dst_row[sx] += src[x];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void check_conv(const SpatialDims& d, const LayerParams<T>& params) {
  if (params.kind != ParamKind::conv3x3) throw ShapeError("conv3x3: layer params are not convolutional");
  params.validate();
  if (params.in_dim() != d.channels) {
    throw ShapeError("conv3x3: input has " + std::to_string(d.channels) + " channels, filters expect " +
                     std::to_string(params.in_dim()));
  }
}

std::size_t samples_per_chunk(std::size_t plane) { return std::max<std::size_t>(1, kMaxColumns / plane); }

struct FlatDims {
  std::size_t batch, features;
};

template <typename T>
FlatDims flat_dims(const Tensor<T>& t, const char* op) {
  if (t.rank() == 1) return {1, t.dim(0)};
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  throw ShapeError(std::string(op) + ": expected (n) or (B×n), got " + shape_to_string(t.shape()));
}

}  // namespace

template <typename T>
void LayerParams<T>::validate() const {
  const auto& ws = weights.shape();
  if (kind == ParamKind::conv3x3) {
    if (ws.size() != 4 || ws[2] != 3 || ws[3] != 3) {
      throw ShapeError("conv3x3 weights must be (out, in, 3, 3), got " + shape_to_string(ws));
    }
  } else if (ws.size() != 2) {
    throw ShapeError("dense weights must be (out, in), got " + shape_to_string(ws));
  }
  if (bias.rank() != 1 || bias.dim(0) != ws[0]) {
    throw ShapeError("bias " + shape_to_string(bias.shape()) + " does not match weights " + shape_to_string(ws));
  }
}

template <typename T>
Tensor<T> conv3x3_forward(const Tensor<T>& input, const LayerParams<T>& params) {
  const SpatialDims d = spatial_dims(input, "conv3x3");
  check_conv(d, params);
  const std::size_t cout = params.out_dim();
  const std::size_t hw = d.plane();
  const SpatialDims od{d.batch, cout, d.height, d.width};
  Tensor<T> output(spatial_shape(input.rank() == 4, od));

  ConstMatMap<T> wm(params.weights.data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(d.channels * 9));
  const std::size_t chunk = samples_per_chunk(hw);
  RowMat<T> cols;
  RowMat<T> out;
  for (std::size_t first = 0; first < d.batch; first += chunk) {
    const std::size_t count = std::min(chunk, d.batch - first);
    im2col(input.data(), d, first, count, cols);
    out.noalias() = wm * cols;
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t co = 0; co < cout; ++co) {
        const T* src = out.row(static_cast<Eigen::Index>(co)).data() + j * hw;
        T* dst = output.data() + ((first + j) * cout + co) * hw;
        const T b = params.bias[co];
        for (std::size_t p = 0; p < hw; ++p) dst[p] = src[p] + b;
      }
    }
  }
  return output;
}

template <typename T>
void conv3x3_backward(const Tensor<T>& input, const Tensor<T>& grad_output, const LayerParams<T>& params,
                      LayerParams<T>& grads, Tensor<T>* grad_input) {
  const SpatialDims d = spatial_dims(input, "conv3x3_backward");
  check_conv(d, params);
  const std::size_t cout = params.out_dim();
  const std::size_t hw = d.plane();
  if (grad_output.size() != d.batch * cout * hw) throw ShapeError("conv3x3_backward: gradient shape mismatch");
  if (grads.weights.shape() != params.weights.shape() || grads.bias.shape() != params.bias.shape()) {
    throw ShapeError("conv3x3_backward: gradient buffers do not match parameters");
  }
  if (grad_input) {
    if (grad_input->shape() != input.shape()) *grad_input = Tensor<T>(input.shape());
    else grad_input->fill(T{0});
  }

  const auto k = static_cast<Eigen::Index>(d.channels * 9);
  ConstMatMap<T> wm(params.weights.data(), static_cast<Eigen::Index>(cout), k);
  MatMap<T> gw(grads.weights.data(), static_cast<Eigen::Index>(cout), k);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(grads.bias.data(), static_cast<Eigen::Index>(cout));

  const std::size_t chunk = samples_per_chunk(hw);
  RowMat<T> cols;
  RowMat<T> dout;
  RowMat<T> dcols;
  for (std::size_t first = 0; first < d.batch; first += chunk) {
    const std::size_t count = std::min(chunk, d.batch - first);
    dout.resize(static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(count * hw));
    for (std::size_t co = 0; co < cout; ++co) {
      T* dst = dout.row(static_cast<Eigen::Index>(co)).data();
      for (std::size_t j = 0; j < count; ++j) {
        const T* src = grad_output.data() + ((first + j) * cout + co) * hw;
        std::copy(src, src + hw, dst + j * hw);
      }
    }
    im2col(input.data(), d, first, count, cols);
    gw.noalias() += dout * cols.transpose();
    gb += dout.rowwise().sum();
    if (grad_input) {
      dcols.noalias() = wm.transpose() * dout;
      col2im_add(dcols, d, first, count, grad_input->data());
    }
  }
}

template <typename T>
PoolOutput<T> maxpool2x2_forward(const Tensor<T>& input) {
  const SpatialDims d = spatial_dims(input, "maxpool2x2");
  const std::size_t oh = (d.height + 1) / 2;
  const std::size_t ow = (d.width + 1) / 2;
  PoolOutput<T> result{Tensor<T>(spatial_shape(input.rank() == 4, {d.batch, d.channels, oh, ow})), {}};
  result.argmax.resize(result.output.size());
  std::size_t o = 0;
  for (std::size_t plane = 0; plane < d.batch * d.channels; ++plane) {
    const std::size_t base = plane * d.plane();
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const std::size_t y_end = std::min(2 * oy + 2, d.height);
      for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
        const std::size_t x_end = std::min(2 * ox + 2, d.width);
        std::size_t best = base + 2 * oy * d.width + 2 * ox;
        for (std::size_t y = 2 * oy; y < y_end; ++y) {
          for (std::size_t x = 2 * ox; x < x_end; ++x) {
            const std::size_t idx = base + y * d.width + x;
            if (input[idx] > input[best]) best = idx;
          }
        }
        result.output[o] = input[best];
        result.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return result;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_output, const std::vector<std::uint32_t>& argmax,
                              const Shape& input_shape) {
  if (grad_output.size() != argmax.size()) throw ShapeError("maxpool2x2_backward: argmax/gradient size mismatch");
  Tensor<T> grad_input(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad_input[argmax[i]] += grad_output[i];
  return grad_input;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const LayerParams<T>& params, Activation activation) {
  if (params.kind != ParamKind::dense) throw ShapeError("dense: layer params are not dense");
  params.validate();
  const FlatDims d = flat_dims(input, "dense");
  if (d.features != params.in_dim()) {
    throw ShapeError("dense: input has " + std::to_string(d.features) + " features, weights expect " +
                     std::to_string(params.in_dim()));
  }
  const std::size_t out_units = params.out_dim();
  Tensor<T> output(input.rank() == 2 ? Shape{d.batch, out_units} : Shape{out_units});
  ConstMatMap<T> x(input.data(), static_cast<Eigen::Index>(d.batch), static_cast<Eigen::Index>(d.features));
  ConstMatMap<T> w(params.weights.data(), static_cast<Eigen::Index>(out_units),
                   static_cast<Eigen::Index>(d.features));
  MatMap<T> y(output.data(), static_cast<Eigen::Index>(d.batch), static_cast<Eigen::Index>(out_units));
  y.noalias() = x * w.transpose();
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(params.bias.data(), static_cast<Eigen::Index>(out_units));
  y.rowwise() += b;
  if (activation == Activation::tanh) tanh_inplace(output);
  return output;
}

template <typename T>
void dense_backward(const Tensor<T>& input, const Tensor<T>& grad_preact, const LayerParams<T>& params,
                    LayerParams<T>& grads, Tensor<T>* grad_input) {
  const FlatDims d = flat_dims(input, "dense_backward");
  const auto out_units = static_cast<Eigen::Index>(params.out_dim());
  const auto in_units = static_cast<Eigen::Index>(d.features);
  if (grad_preact.size() != d.batch * params.out_dim()) throw ShapeError("dense_backward: gradient shape mismatch");
  ConstMatMap<T> x(input.data(), static_cast<Eigen::Index>(d.batch), in_units);
  ConstMatMap<T> g(grad_preact.data(), static_cast<Eigen::Index>(d.batch), out_units);
  ConstMatMap<T> w(params.weights.data(), out_units, in_units);
  MatMap<T> gw(grads.weights.data(), out_units, in_units);
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(grads.bias.data(), out_units);
  gw.noalias() += g.transpose() * x;
  gb += g.colwise().sum();
  if (grad_input) {
    if (grad_input->shape() != input.shape()) *grad_input = Tensor<T>(input.shape());
    MatMap<T> gx(grad_input->data(), static_cast<Eigen::Index>(d.batch), in_units);
    gx.noalias() = g * w;
  }
}

template <typename T>
void tanh_inplace(Tensor<T>& t) {
  for (auto& v : t.values()) v = std::tanh(v);
}

template <typename T>
void tanh_backward_inplace(const Tensor<T>& tanh_output, Tensor<T>& grad) {
  if (tanh_output.size() != grad.size()) throw ShapeError("tanh_backward: size mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= T{1} - tanh_output[i] * tanh_output[i];
}

template <typename T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("mse_loss: prediction " + shape_to_string(pred.shape()) + " vs target " +
                     shape_to_string(target.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    sum += diff * diff;
  }
  return static_cast<T>(sum / static_cast<double>(pred.size()));
}

template <typename T>
Tensor<T> mse_loss_grad(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape()) throw ShapeError("mse_loss_grad: shape mismatch");
  Tensor<T> grad(pred.shape());
  const T scale = T{2} / static_cast<T>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) grad[i] = scale * (pred[i] - target[i]);
  return grad;
}

#define HPE_INSTANTIATE_OPS(T)                                                                             \
  template struct LayerParams<T>;                                                                          \
  template Tensor<T> conv3x3_forward(const Tensor<T>&, const LayerParams<T>&);                              \
  template void conv3x3_backward(const Tensor<T>&, const Tensor<T>&, const LayerParams<T>&, LayerParams<T>&, \
                                 Tensor<T>*);                                                              \
  template PoolOutput<T> maxpool2x2_forward(const Tensor<T>&);                                              \
  template Tensor<T> maxpool2x2_backward(const Tensor<T>&, const std::vector<std::uint32_t>&, const Shape&); \
  template Tensor<T> dense_forward(const Tensor<T>&, const LayerParams<T>&, Activation);                    \
  template void dense_backward(const Tensor<T>&, const Tensor<T>&, const LayerParams<T>&, LayerParams<T>&,   \
                               Tensor<T>*);                                                                \
  template void tanh_inplace(Tensor<T>&);                                                                   \
  template void tanh_backward_inplace(const Tensor<T>&, Tensor<T>&);                                        \
  template T mse_loss(const Tensor<T>&, const Tensor<T>&);                                                  \
  template Tensor<T> mse_loss_grad(const Tensor<T>&, const Tensor<T>&);

HPE_INSTANTIATE_OPS(float)
HPE_INSTANTIATE_OPS(double)

}  // namespace hpe::engine

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hpe/engine/adam.hpp"
#include "hpe/engine/network.hpp"
#include "support/gradcheck.hpp"

using namespace hpe::engine;

namespace {

// Direct 9-tap sum, independent of the im2col path.
Tensor<double> naive_conv(const Tensor<double>& in, const LayerParams<double>& p) {
  const std::size_t cin = in.dim(0), h = in.dim(1), w = in.dim(2), cout = p.out_dim();
  Tensor<double> out({cout, h, w});
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double acc = p.bias[co];
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (int ky = -1; ky <= 1; ++ky)
            for (int kx = -1; kx <= 1; ++kx) {
              const long sy = static_cast<long>(y) + ky, sx = static_cast<long>(x) + kx;
              if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w)) continue;
              acc += in[(ci * h + sy) * w + sx] * p.weights[((co * cin + ci) * 3 + (ky + 1)) * 3 + (kx + 1)];
            }
        out[(co * h + y) * w + x] = acc;
      }
  return out;
}

}  // namespace

TEST(Conv3x3, AllOnesCenterIsNine) {
  auto p = LayerParams<double>::conv(1, 1);
  p.weights.fill(1.0);
  const auto out = conv3x3_forward(Tensor<double>({1, 3, 3}, 1.0), p);
  EXPECT_EQ(out.shape(), (Shape{1, 3, 3}));
  EXPECT_DOUBLE_EQ(out[4], 9.0);
  EXPECT_DOUBLE_EQ(out[0], 4.0);  // corner sees 4 taps under zero padding
}

TEST(Conv3x3, ZeroWeightsGiveZeros) {
  std::mt19937_64 rng(1);
  const auto in = hpe::testing::random_tensor(rng, {3, 7, 5}, -1, 1);
  const auto out = conv3x3_forward(in, LayerParams<double>::conv(3, 4));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv3x3, CenterTapIdentityOnSinglePixel) {
  auto p = LayerParams<double>::conv(1, 1);
  p.weights[4] = 1.0;
  p.bias[0] = 0.25;
  const auto out = conv3x3_forward(Tensor<double>({1, 1, 1}, 2.0), p);
  EXPECT_DOUBLE_EQ(out[0], 2.25);
}

TEST(Conv3x3, MatchesDirectSumOnRandomInput) {
  std::mt19937_64 rng(7);
  auto p = LayerParams<double>::conv(3, 5);
  p.weights = hpe::testing::random_tensor(rng, {5, 3, 3, 3}, -1, 1);
  p.bias = hpe::testing::random_tensor(rng, {5}, -1, 1);
  const auto in = hpe::testing::random_tensor(rng, {3, 9, 6}, -1, 1);
  const auto got = conv3x3_forward(in, p);
  const auto want = naive_conv(in, p);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Conv3x3, BatchedEqualsPerSample) {
  std::mt19937_64 rng(11);
  auto p = LayerParams<double>::conv(2, 3);
  p.weights = hpe::testing::random_tensor(rng, {3, 2, 3, 3}, -1, 1);
  const auto batch = hpe::testing::random_tensor(rng, {3, 2, 5, 5}, -1, 1);
  const auto out = conv3x3_forward(batch, p);
  for (std::size_t b = 0; b < 3; ++b) {
    Tensor<double> one({2, 5, 5});
    std::copy_n(batch.data() + b * 50, 50, one.data());
    const auto single = conv3x3_forward(one, p);
    for (std::size_t i = 0; i < single.size(); ++i) EXPECT_EQ(out[b * 75 + i], single[i]);
  }
}

TEST(Conv3x3, RejectsChannelMismatch) {
  EXPECT_THROW(conv3x3_forward(Tensor<double>({2, 4, 4}), LayerParams<double>::conv(3, 1)), ShapeError);
  EXPECT_THROW(conv3x3_forward(Tensor<double>({4, 4}), LayerParams<double>::conv(1, 1)), ShapeError);
}

TEST(MaxPool, MaxOfFour) {
  const auto r = maxpool2x2_forward(Tensor<double>({1, 2, 2}, {1, 2, 3, 4}));
  ASSERT_EQ(r.output.size(), 1u);
  EXPECT_EQ(r.output[0], 4.0);
  EXPECT_EQ(r.argmax[0], 3u);
}

TEST(MaxPool, ConstantStaysConstant) {
  const auto r = maxpool2x2_forward(Tensor<double>({2, 5, 3}, 0.7));
  EXPECT_EQ(r.output.shape(), (Shape{2, 3, 2}));
  for (double v : r.output.values()) EXPECT_EQ(v, 0.7);
}

TEST(MaxPool, OddEdgeWindowsShrink) {
  // 3x3 -> 2x2; the right column and bottom row form their own windows.
  const auto r = maxpool2x2_forward(Tensor<double>({1, 3, 3}, {1, 2, 9, 3, 4, 1, 8, 0, 5}));
  EXPECT_EQ(r.output.values()[0], 4.0);
  EXPECT_EQ(r.output.values()[1], 9.0);
  EXPECT_EQ(r.output.values()[2], 8.0);
  EXPECT_EQ(r.output.values()[3], 5.0);
}

TEST(MaxPool, SixHalvingsTake64To1) {
  Tensor<float> x({1, 64, 64}, 1.0f);
  x = maxpool2x2_forward(x).output;
  EXPECT_EQ(x.shape(), (Shape{1, 32, 32}));
  for (int i = 0; i < 5; ++i) x = maxpool2x2_forward(x).output;
  EXPECT_EQ(x.shape(), (Shape{1, 1, 1}));
}

TEST(MaxPool, GradientRoutesToArgmaxAndPreservesSum) {
  std::mt19937_64 rng(3);
  const auto in = hpe::testing::random_tensor(rng, {2, 3, 7, 6}, -1, 1);
  const auto r = maxpool2x2_forward(in);
  const auto g = hpe::testing::random_tensor(rng, r.output.shape(), -1, 1);
  const auto back = maxpool2x2_backward(g, r.argmax, in.shape());
  double sum_in = 0, sum_out = 0;
  for (double v : g.values()) sum_out += v;
  for (std::size_t i = 0; i < back.size(); ++i) {
    sum_in += back[i];
    const bool is_winner = std::find(r.argmax.begin(), r.argmax.end(), i) != r.argmax.end();
    if (!is_winner) {
      EXPECT_EQ(back[i], 0.0);
    }
  }
  EXPECT_NEAR(sum_in, sum_out, 1e-12);
}

TEST(Dense, ZeroParamsTanhIsZero) {
  const auto out = dense_forward(Tensor<double>({3}, {1, 2, 3}), LayerParams<double>::dense(3, 2), Activation::tanh);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 0.0);
}

TEST(Dense, IdentityLinear) {
  auto p = LayerParams<double>::dense(3, 3);
  for (int i = 0; i < 3; ++i) p.weights[i * 3 + i] = 1.0;
  const Tensor<double> x({3}, {0.5, -2.0, 7.0});
  EXPECT_EQ(dense_forward(x, p, Activation::linear), x);
}

TEST(Dense, TanhOfOne) {
  auto p = LayerParams<double>::dense(2, 1);
  p.weights.fill(0.5);
  const auto out = dense_forward(Tensor<double>({2}, 1.0), p, Activation::tanh);
  EXPECT_NEAR(out[0], 0.7615941559557649, 1e-15);
}

TEST(Dense, RejectsLengthMismatch) {
  EXPECT_THROW(dense_forward(Tensor<double>({4}), LayerParams<double>::dense(3, 2), Activation::tanh), ShapeError);
}

TEST(Mse, Examples) {
  const Tensor<double> a({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(mse_loss(a, a), 0.0);
  Tensor<double> shifted = a;
  for (auto& v : shifted.values()) v += 2.0;
  EXPECT_DOUBLE_EQ(mse_loss(shifted, a), 4.0);
  EXPECT_DOUBLE_EQ(mse_loss(Tensor<double>({1, 2}, {1, 0}), Tensor<double>({1, 2}, {0, 0})), 0.5);
  EXPECT_THROW(mse_loss(a, Tensor<double>({4, 1})), ShapeError);
}

TEST(Backprop, LinearRegressionClosedForm) {
  Network<double> net({1, 1, 3});
  net.add_flatten();
  net.add_dense(2, Activation::linear);
  auto& p = net.params()[0];
  p.weights = Tensor<double>({2, 3}, {0.3, -0.2, 0.5, 0.1, 0.4, -0.6});
  p.bias = Tensor<double>({2}, {0.05, -0.1});
  const Tensor<double> x({2, 1, 1, 3}, {1.0, 2.0, -1.0, 0.5, -0.5, 3.0});
  const Tensor<double> t({2, 2}, {0.2, -0.3, 1.0, 0.4});
  const auto r = backprop(net, x, t);

  // dL/dW = sum_b 2 (W x_b + b - t_b) x_b^T / n, n = 4 entries.
  for (std::size_t o = 0; o < 2; ++o) {
    double gb = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      double g = 0;
      for (std::size_t b = 0; b < 2; ++b) {
        double pred = p.bias[o];
        for (std::size_t k = 0; k < 3; ++k) pred += p.weights[o * 3 + k] * x[b * 3 + k];
        g += 2.0 * (pred - t[b * 2 + o]) * x[b * 3 + i] / 4.0;
        if (i == 0) gb += 2.0 * (pred - t[b * 2 + o]) / 4.0;
      }
      EXPECT_NEAR(r.grads.layers[0].weights[o * 3 + i], g, 1e-12);
    }
    EXPECT_NEAR(r.grads.layers[0].bias[o], gb, 1e-12);
  }
}

TEST(Backprop, ExactFitHasZeroGradient) {
  Network<double> net({1, 8, 8});
  net.add_conv3x3_tanh(2);
  net.add_maxpool2x2();
  net.add_flatten();
  net.add_dense(4, Activation::tanh);
  net.add_dense(2, Activation::linear);
  std::mt19937_64 rng(5);
  for (auto& prm : net.params()) prm.weights = hpe::testing::random_tensor(rng, prm.weights.shape(), -0.3, 0.3);
  const auto x = hpe::testing::random_tensor(rng, {3, 1, 8, 8}, 0, 1);
  const auto target = net.forward(x);
  const auto r = backprop(net, x, target);
  EXPECT_EQ(r.loss, 0.0);
  for (const auto& g : r.grads.layers) {
    for (double v : g.weights.values()) EXPECT_EQ(v, 0.0);
    for (double v : g.bias.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backprop, MatchesFiniteDifferencesOnSmallNet) {
  std::mt19937_64 rng(2024);
  const auto net = hpe::testing::random_network(rng, 2, 4, 8, 16);
  const auto x = hpe::testing::random_tensor(rng, {2, 1, 16, 16}, 0, 1);
  const auto t = hpe::testing::random_tensor(rng, {2, 2}, -1, 1);
  const auto check = hpe::testing::finite_difference_check(net, x, t, 9);
  EXPECT_GT(check.checked, 50u);
  EXPECT_LE(check.skipped_at_kinks * 20, check.checked);
  EXPECT_LT(check.max_relative_error, 1e-5);
}

TEST(Backprop, IsDeterministic) {
  std::mt19937_64 rng(77);
  const auto net = hpe::testing::random_network(rng).cast<float>();
  const auto x = tensor_cast<float>(hpe::testing::random_tensor(rng, {4, 1, 64, 64}, 0, 1));
  const Tensor<float> t({4, 2}, 0.1f);
  const auto a = backprop(net, x, t);
  const auto b = backprop(net, x, t);
  EXPECT_EQ(a.loss, b.loss);
  for (std::size_t l = 0; l < a.grads.layers.size(); ++l) EXPECT_EQ(a.grads.layers[l], b.grads.layers[l]);
}

TEST(Backprop, NonFiniteActivationNamesLayer) {
  Network<double> net({1, 4, 4});
  net.add_conv3x3_tanh(1);
  net.add_maxpool2x2();
  net.add_flatten();
  net.add_dense(2, Activation::linear);
  net.params()[1].weights[0] = std::numeric_limits<double>::infinity();
  try {
    backprop(net, Tensor<double>({1, 1, 4, 4}, 1.0), Tensor<double>({1, 2}));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.layer_index(), 3u);
  }
}

TEST(Network, TanhOutputsStayInOpenInterval) {
  Network<double> net({1, 4, 4});
  net.add_conv3x3_tanh(3);
  net.params()[0].weights.fill(0.2);
  std::mt19937_64 rng(8);
  const auto out = net.forward(hpe::testing::random_tensor(rng, {5, 1, 4, 4}, -3, 3));
  for (double v : out.values()) {
    EXPECT_GT(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Network, HeadValidation) {
  Network<float> net({1, 4, 4});
  net.add_flatten();
  net.add_dense(3, Activation::linear);
  EXPECT_THROW(net.validate_head(), ShapeError);
  EXPECT_THROW(net.add_conv3x3_tanh(2), ShapeError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<LayerParams<double>> params{LayerParams<double>::dense(1, 1)};
  GradientSet<double> grads{{LayerParams<double>::dense(1, 1)}};
  grads.layers[0].weights[0] = 1.0;
  AdamState<double> state;
  adam_step(params, grads, state);
  EXPECT_NEAR(params[0].weights[0], -0.001, 1e-6);
  EXPECT_EQ(params[0].bias[0], 0.0);  // zero gradient leaves the bias alone
  EXPECT_EQ(state.step_count, 1u);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  std::mt19937_64 rng(6);
  std::vector<LayerParams<double>> params{LayerParams<double>::dense(3, 2)};
  params[0].weights = hpe::testing::random_tensor(rng, {2, 3}, -1, 1);
  const auto before = params;
  GradientSet<double> grads{{LayerParams<double>::dense(3, 2)}};
  AdamState<double> state;
  for (int i = 0; i < 3; ++i) adam_step(params, grads, state);
  EXPECT_EQ(params, before);
}

TEST(Adam, FirstStepOpposesGradientSign) {
  std::mt19937_64 rng(4);
  std::vector<LayerParams<double>> params{LayerParams<double>::dense(4, 3)};
  GradientSet<double> grads{{LayerParams<double>::dense(4, 3)}};
  grads.layers[0].weights = hpe::testing::random_tensor(rng, {3, 4}, -5, 5);
  AdamState<double> state;
  adam_step(params, grads, state);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(std::signbit(params[0].weights[i]), !std::signbit(grads.layers[0].weights[i]));
  }
}

TEST(Adam, RejectsNonPositiveLearningRate) {
  std::vector<LayerParams<double>> params{LayerParams<double>::dense(1, 1)};
  GradientSet<double> grads{{LayerParams<double>::dense(1, 1)}};
  AdamState<double> state;
  state.learning_rate = 0.0;
  EXPECT_THROW(adam_step(params, grads, state), std::invalid_argument);
}

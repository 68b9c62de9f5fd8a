#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "trackrl/layers.hpp"
#include "trackrl/tensor.hpp"

using namespace trackrl;

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), std::invalid_argument);
  EXPECT_THROW(Tensor(Shape{2, 0}), std::invalid_argument);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t[5], 1.5);
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor t({2, 2}, {1, 2, 3, 4});
  const Tensor r = t.reshaped({4});
  EXPECT_EQ(r.shape(), (Shape{4}));
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshaped({3}), std::invalid_argument);
}

TEST(LeakyRelu, Examples) {
  EXPECT_EQ(leaky_relu(2.0, 0.01), 2.0);
  EXPECT_EQ(leaky_relu(-1.0, 0.01), -0.01);
  EXPECT_EQ(leaky_relu(0.0, 0.01), 0.0);
  const Tensor y = leaky_relu(Tensor::rank1({2.0, -1.0, 0.0}), 0.01);
  EXPECT_EQ(y.values(), (std::vector<double>{2.0, -0.01, 0.0}));
  EXPECT_THROW(leaky_relu(Tensor::rank1({1.0}), 0.0), std::invalid_argument);
}

TEST(Activation, TanhDerivativeAtZeroIsOne) {
  const auto act = ActivationSpec::tanh();
  const double out = activate(act, 0.0);
  EXPECT_EQ(out, 0.0);
  EXPECT_EQ(activation_derivative(act, 0.0, out), 1.0);
}

TEST(Activation, TanhStaysInsideOpenInterval) {
  const auto act = ActivationSpec::tanh();
  for (double x : {20.0, 50.0, 1e6}) {
    EXPECT_LT(activate(act, x), 1.0);
    EXPECT_GT(activate(act, -x), -1.0);
  }
}

TEST(Conv2d, AllOnesKernelSumsInput) {
  Tensor in({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Tensor out = conv2d_forward(in, Tensor({1, 1, 3, 3}, 1.0), 1);
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(out[0], 45.0);
}

TEST(Conv2d, UnitKernelScales) {
  std::mt19937_64 rng(3);
  const Tensor in = test_support::random_tensor({2, 4, 5}, rng);
  Tensor kernel({2, 2, 1, 1}, 0.0);
  kernel[0] = 2.5;  // filter 0 <- 2.5 * channel 0
  kernel[3] = 2.5;  // filter 1 <- 2.5 * channel 1
  const Tensor out = conv2d_forward(in, kernel, 1);
  ASSERT_EQ(out.shape(), in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out[i], 2.5 * in[i]);
}

TEST(Conv2d, RejectsOversizedKernel) {
  EXPECT_THROW(conv2d_forward(Tensor({1, 3, 3}), Tensor({1, 1, 4, 2}), 1),
               std::invalid_argument);
  EXPECT_THROW(conv2d_forward(Tensor({1, 3, 3}), Tensor({1, 1, 2, 2}), 0),
               std::invalid_argument);
  EXPECT_THROW(Layer(LayerSpec::conv2d(1, 5, 5, 1, ActivationSpec::linear()), {1, 4, 4}),
               std::invalid_argument);
}

TEST(Conv3d, BlockSumsMatchBruteForce) {
  std::mt19937_64 rng(11);
  const Tensor in = test_support::random_tensor({1, 4, 4, 4}, rng);
  const Tensor out = conv3d_forward(in, Tensor({1, 1, 2, 2, 2}, 1.0), {2, 2, 2});
  ASSERT_EQ(out.shape(), (Shape{1, 2, 2, 2}));
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t x = 0; x < 2; ++x) {
        double s = 0.0;
        for (std::size_t a = 0; a < 2; ++a) {
          for (std::size_t b = 0; b < 2; ++b) {
            for (std::size_t c = 0; c < 2; ++c) {
              s += in[((2 * t + a) * 4 + 2 * y + b) * 4 + 2 * x + c];
            }
          }
        }
        EXPECT_NEAR(out[(t * 2 + y) * 2 + x], s, 1e-14);
      }
    }
  }
}

TEST(Conv3d, GeneralKernelMatchesBruteForce) {
  std::mt19937_64 rng(12);
  const Shape is{2, 5, 6, 7};
  const Shape ks{3, 2, 2, 3, 2};
  const std::array<std::size_t, 3> st{1, 2, 3};
  const Tensor in = test_support::random_tensor(is, rng);
  const Tensor k = test_support::random_tensor(ks, rng);
  const Tensor out = conv3d_forward(in, k, st);
  const std::size_t od = (5 - 2) / 1 + 1, oh = (6 - 3) / 2 + 1, ow = (7 - 2) / 3 + 1;
  ASSERT_EQ(out.shape(), (Shape{3, od, oh, ow}));
  for (std::size_t f = 0; f < 3; ++f)
    for (std::size_t t = 0; t < od; ++t)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
          double s = 0.0;
          for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t a = 0; a < 2; ++a)
              for (std::size_t b = 0; b < 3; ++b)
                for (std::size_t e = 0; e < 2; ++e) {
                  const double iv = in[((c * 5 + t + a) * 6 + 2 * y + b) * 7 + 3 * x + e];
                  const double kv = k[(((f * 2 + c) * 2 + a) * 3 + b) * 2 + e];
                  s += iv * kv;
                }
          EXPECT_NEAR(out[((f * od + t) * oh + y) * ow + x], s, 1e-13);
        }
}

TEST(Conv, LinearBranchIsLinear) {
  std::mt19937_64 rng(5);
  Layer layer(LayerSpec::conv2d(3, 3, 3, 2, ActivationSpec::linear()), {2, 7, 7});
  layer.initialize(rng);
  layer.bias().fill(0.0);
  const Tensor x = test_support::random_tensor({2, 7, 7}, rng);
  const Tensor y = test_support::random_tensor({2, 7, 7}, rng);
  Tensor sum = x, scaled = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum[i] = x[i] + y[i];
    scaled[i] = 3.0 * x[i];
  }
  const Tensor fx = layer.forward(x.data());
  const Tensor fy = layer.forward(y.data());
  const Tensor fs = layer.forward(sum.data());
  const Tensor fa = layer.forward(scaled.data());
  for (std::size_t i = 0; i < fx.size(); ++i) {
    EXPECT_NEAR(fs[i], fx[i] + fy[i], 1e-12);
    EXPECT_NEAR(fa[i], 3.0 * fx[i], 1e-12);
  }
}

TEST(Layer, InitializationWithinFanInBound) {
  std::mt19937_64 rng(1);
  Layer dense(LayerSpec::dense(7, ActivationSpec::linear()), {16});
  dense.initialize(rng);
  for (double w : dense.weights().data()) EXPECT_LE(std::abs(w), 0.25);
  for (double b : dense.bias().data()) EXPECT_LE(std::abs(b), 0.25);
}

TEST(Layer, DenseWeightGradientIsOuterProduct) {
  Layer l(LayerSpec::dense(2, ActivationSpec::linear()), {3});
  std::mt19937_64 rng(2);
  l.initialize(rng);
  const std::vector<double> x{0.5, -1.0, 2.0};
  l.forward(x);
  const std::vector<double> up{1.0, 1.0};
  l.backward(up, true, {});
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(l.grad_weights()[o * 3 + i], x[i]);
    EXPECT_EQ(l.grad_bias()[o], 1.0);
  }
}

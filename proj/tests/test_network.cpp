#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "trackrl/network.hpp"
#include "trackrl/networks.hpp"

using namespace trackrl;

namespace {

NetworkSpec single_dense(std::size_t in, std::size_t out, ActivationSpec act) {
  return {{{"x", {in}, {}}}, {LayerSpec::dense(out, act)}};
}

}  // namespace

TEST(Network, IdentityDense) {
  Network net(single_dense(2, 2, ActivationSpec::linear()), 1);
  net.set_flat_parameters(std::vector<double>{1, 0, 0, 1, 0, 0});
  EXPECT_EQ(net.predict({Tensor::rank1({1, 2})}).values(), (std::vector<double>{1, 2}));
}

TEST(Network, MatrixVector) {
  Network net(single_dense(2, 2, ActivationSpec::linear()), 1);
  net.set_flat_parameters(std::vector<double>{1, 2, 3, 4, 0, 0});
  EXPECT_EQ(net.forward({Tensor::rank1({1, 1})}).values(), (std::vector<double>{3, 7}));
}

TEST(Network, ZeroTanhHeadOutputsZero) {
  NetworkOptions o;
  Network actor(stairs_actor_spec(o), 4);
  auto& head = actor.trunk_layer(2);
  head.weights().fill(0.0);
  head.bias().fill(0.0);
  std::mt19937_64 rng(4);
  const auto out = actor.predict(test_support::random_inputs(actor.spec(), rng));
  EXPECT_EQ(out.values(), (std::vector<double>{0.0, 0.0}));
}

TEST(Network, ShapeMismatchNamesBranch) {
  Network net(stairs_critic_spec({}), 1);
  std::mt19937_64 rng(1);
  auto xs = test_support::random_inputs(net.spec(), rng);
  xs[2] = Tensor::rank1({1, 2, 3});
  try {
    net.predict(xs);
    FAIL() << "expected a shape error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("imu"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[6]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[3]"), std::string::npos) << msg;
  }
}

TEST(Network, BackwardBeforeForwardRejected) {
  Network net(single_dense(2, 1, ActivationSpec::linear()), 1);
  EXPECT_THROW(net.backward(Tensor::rank1({1.0})), std::logic_error);
}

TEST(Network, ForwardIsDeterministic) {
  Network net(stairs_critic_spec({}), 9);
  std::mt19937_64 rng(2);
  const auto xs = test_support::random_inputs(net.spec(), rng);
  const Tensor a = net.forward(xs);
  const Tensor b = net.predict(xs);
  EXPECT_EQ(a, b);
  Network again(stairs_critic_spec({}), 9);
  EXPECT_EQ(again.predict(xs), a);
}

TEST(Network, DefaultStairsLayout) {
  NetworkOptions o;
  Network actor(stairs_actor_spec(o), 1);
  EXPECT_EQ(actor.output_size(), 2u);
  EXPECT_EQ(actor.branch_count(), 3u);
  o.topology = Topology::conv3d;
  Network critic(stairs_critic_spec(o), 1);
  EXPECT_EQ(critic.output_size(), 1u);
  EXPECT_EQ(critic.spec().branches[0].input_shape, (Shape{1, 4, 34, 34}));
  EXPECT_NE(spec_hash(stairs_critic_spec({})), critic.hash());
}

TEST(Network, GradientCheckRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 40; ++i) {
    NetworkSpec spec;
    switch (i % 4) {
      case 0: spec = test_support::random_dense_spec(rng); break;
      case 1: spec = test_support::random_conv2d_spec(rng); break;
      case 2: spec = test_support::random_conv3d_spec(rng); break;
      default: spec = test_support::random_merged_spec(rng); break;
    }
    Network net(spec, rng());
    const auto r = test_support::check_gradients(net, test_support::random_inputs(spec, rng), rng);
    EXPECT_LT(r.parameter_error, 1e-4) << describe(spec);
    EXPECT_LT(r.input_error, 1e-4) << describe(spec);
  }
}

TEST(Network, SoftUpdateBlends) {
  Network main(single_dense(2, 1, ActivationSpec::linear()), 1);
  Network target(single_dense(2, 1, ActivationSpec::linear()), 2);
  main.set_flat_parameters(std::vector<double>{1, 1, 1});
  target.set_flat_parameters(std::vector<double>{0, 0, 0});
  soft_update(target, main, 0.25);
  EXPECT_EQ(target.flat_parameters(), (std::vector<double>{0.25, 0.25, 0.25}));
  Network other(single_dense(3, 1, ActivationSpec::linear()), 1);
  EXPECT_THROW(soft_update(other, main, 0.5), std::invalid_argument);
}

TEST(Network, RequestedInputGradientsOnly) {
  Network net(stairs_critic_spec({}), 3);
  std::mt19937_64 rng(3);
  net.forward(test_support::random_inputs(net.spec(), rng));
  GradientRequest req{false, {false, false, false, true}};
  const auto g = net.backward(Tensor::rank1({1.0}), req);
  EXPECT_TRUE(g[0].empty());
  EXPECT_EQ(g[3].shape(), (Shape{2}));
  for (const Tensor* t : net.gradients()) {
    for (double v : t->data()) ASSERT_EQ(v, 0.0);
  }
}

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "trackrl/network.hpp"
#include "trackrl/tensor.hpp"

namespace trackrl::test_support {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = d(rng);
  return t;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

struct GradientCheck {
  double parameter_error = 0.0;  // worst over parameter tensors
  double input_error = 0.0;      // worst over input tensors
};

// Compares backward() against central differences of L = <net(x), u>.
inline GradientCheck check_gradients(Network& net, std::vector<Tensor> inputs,
                                     std::mt19937_64& rng, double h = 1e-5) {
  const Tensor u = random_tensor({net.output_size()}, rng);
  auto objective = [&](const std::vector<Tensor>& xs) {
    return dot(net.predict(xs).data(), u.data());
  };

  net.zero_grad();
  net.forward(inputs);
  GradientRequest req;
  req.inputs.assign(inputs.size(), true);
  const auto input_grads = net.backward(u, req);

  GradientCheck out;
  const auto params = net.parameters();
  const auto grads = net.gradients();
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<double> numeric(params[p]->size());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      double& w = (*params[p])[k];
      const double saved = w;
      w = saved + h;
      const double plus = objective(inputs);
      w = saved - h;
      const double minus = objective(inputs);
      w = saved;
      numeric[k] = (plus - minus) / (2.0 * h);
    }
    out.parameter_error =
        std::max(out.parameter_error, relative_error(grads[p]->data(), numeric));
  }
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    std::vector<double> numeric(inputs[b].size());
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const double saved = inputs[b][k];
      inputs[b][k] = saved + h;
      const double plus = objective(inputs);
      inputs[b][k] = saved - h;
      const double minus = objective(inputs);
      inputs[b][k] = saved;
      numeric[k] = (plus - minus) / (2.0 * h);
    }
    out.input_error = std::max(out.input_error, relative_error(input_grads[b].data(), numeric));
  }
  return out;
}

// Random small architectures exercising each layer kind and activation.
inline ActivationSpec random_activation(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      return ActivationSpec::linear();
    case 1:
      return ActivationSpec::leaky(0.01);
    default:
      return ActivationSpec::tanh();
  }
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline NetworkSpec random_dense_spec(std::mt19937_64& rng) {
  NetworkSpec s;
  s.branches.push_back({"x", {pick(rng, 1, 6)}, {}});
  const std::size_t depth = pick(rng, 1, 3);
  for (std::size_t i = 0; i < depth; ++i) {
    s.trunk.push_back(LayerSpec::dense(pick(rng, 1, 5), random_activation(rng)));
  }
  return s;
}

inline NetworkSpec random_conv2d_spec(std::mt19937_64& rng) {
  const std::size_t c = pick(rng, 1, 3), h = pick(rng, 4, 7), w = pick(rng, 4, 7);
  const std::size_t kh = pick(rng, 1, 3), kw = pick(rng, 1, 3);
  NetworkSpec s;
  s.branches.push_back(
      {"image", {c, h, w}, {LayerSpec::conv2d(pick(rng, 1, 3), kh, kw, pick(rng, 1, 2),
                                              random_activation(rng))}});
  s.trunk.push_back(LayerSpec::dense(pick(rng, 1, 3), random_activation(rng)));
  return s;
}

inline NetworkSpec random_conv3d_spec(std::mt19937_64& rng) {
  const std::size_t c = pick(rng, 1, 2), d = pick(rng, 2, 4), h = pick(rng, 4, 6),
                    w = pick(rng, 4, 6);
  NetworkSpec s;
  s.branches.push_back(
      {"volume",
       {c, d, h, w},
       {LayerSpec::conv3d(pick(rng, 1, 3), {pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 3)},
                          {1, pick(rng, 1, 2), pick(rng, 1, 2)}, random_activation(rng))}});
  s.trunk.push_back(LayerSpec::dense(pick(rng, 1, 3), random_activation(rng)));
  return s;
}

// Miniature of the actor/critic layout: two stacked-camera branches, an IMU
// branch and an optional pass-through action branch merged into a dense trunk.
inline NetworkSpec random_merged_spec(std::mt19937_64& rng) {
  const bool volume = pick(rng, 0, 1) == 1;
  const std::size_t side = pick(rng, 5, 7);
  auto camera = [&](const std::string& name) {
    BranchSpec b;
    b.name = name;
    if (volume) {
      b.input_shape = {1, 3, side, side};
      b.layers = {LayerSpec::conv3d(2, {2, 3, 3}, {1, 2, 2}, ActivationSpec::linear()),
                  LayerSpec::conv3d(2, {1, 2, 2}, {1, 1, 1}, ActivationSpec::linear())};
    } else {
      b.input_shape = {3, side, side};
      b.layers = {LayerSpec::conv2d(2, 3, 3, 2, ActivationSpec::linear()),
                  LayerSpec::conv2d(2, 2, 2, 1, ActivationSpec::linear())};
    }
    return b;
  };
  NetworkSpec s;
  s.branches.push_back(camera("front"));
  s.branches.push_back(camera("back"));
  s.branches.push_back({"imu", {6}, {LayerSpec::dense(3, ActivationSpec::leaky(0.01))}});
  const bool critic = pick(rng, 0, 1) == 1;
  if (critic) s.branches.push_back({"action", {2}, {LayerSpec::dense(3, ActivationSpec::leaky(0.01))}});
  s.trunk = {LayerSpec::dense(4, ActivationSpec::leaky(0.01)),
             LayerSpec::dense(3, ActivationSpec::leaky(0.01)),
             LayerSpec::dense(critic ? 1 : 2,
                              critic ? ActivationSpec::linear() : ActivationSpec::tanh())};
  return s;
}

inline std::vector<Tensor> random_inputs(const NetworkSpec& spec, std::mt19937_64& rng) {
  std::vector<Tensor> xs;
  for (const auto& b : spec.branches) xs.push_back(random_tensor(b.input_shape, rng));
  return xs;
}

}  // namespace trackrl::test_support

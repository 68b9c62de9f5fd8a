#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "trackrl/tensor.hpp"

namespace trackrl {

struct AdamConfig {
  double learning_rate = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators mirror the parameter list they were built for.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::span<const Tensor* const> params) : config(cfg) {
    if (!(cfg.learning_rate > 0.0) || !(cfg.epsilon > 0.0) || !(cfg.beta1 > 0.0) ||
        !(cfg.beta1 < 1.0) || !(cfg.beta2 > 0.0) || !(cfg.beta2 < 1.0)) {
      throw std::invalid_argument("invalid Adam hyperparameters");
    }
    for (const Tensor* p : params) {
      first_moment.emplace_back(p->shape());
      second_moment.emplace_back(p->shape());
    }
  }
};

// Bias-corrected Adam update, in place.
inline void adam_step(std::span<Tensor* const> params, std::span<Tensor* const> grads,
                      AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: parameter/gradient/moment counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() ||
        params[i]->shape() != state.first_moment[i].shape()) {
      throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                  std::to_string(i));
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i]->data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / correction1;
      const double vhat = v[k] / correction2;
      p[k] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace trackrl

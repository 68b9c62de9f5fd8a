#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "trackrl/tensor.hpp"

namespace trackrl::sim {

// Scalar validation task: x' = x + 0.1 a, reward -x'^2, fixed horizon.
struct ToyState {
  double x = 0.0;
  std::size_t t = 0;

  std::vector<Tensor> actor_inputs() const { return {Tensor::rank1({x})}; }
  std::vector<Tensor> critic_inputs() const { return {Tensor::rank1({x})}; }
};

struct ToyStep {
  ToyState next;
  double reward = 0.0;
  bool terminal = false;
};

constexpr double kToyGain = 0.1;

inline ToyStep toy_env_step(const ToyState& s, double action, std::size_t horizon) {
  ToyStep out;
  out.next.x = s.x + kToyGain * action;
  out.next.t = s.t + 1;
  out.reward = -out.next.x * out.next.x;
  out.terminal = out.next.t >= horizon;
  return out;
}

// Drive toward zero at full rate, stopping exactly on it.
inline double toy_optimal_return(double x0, std::size_t horizon) {
  double x = x0;
  double ret = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const double a = std::clamp(-x / kToyGain, -1.0, 1.0);
    x += kToyGain * a;
    ret -= x * x;
  }
  return ret;
}

inline double toy_do_nothing_return(double x0, std::size_t horizon) {
  return -static_cast<double>(horizon) * x0 * x0;
}

}  // namespace trackrl::sim

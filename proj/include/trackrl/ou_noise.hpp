#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace trackrl {

struct OuParams {
  double theta = 0.15;
  double mu = 0.0;
  double sigma = 0.2;
  double dt = 1.0;
};

// Ornstein-Uhlenbeck exploration noise, one independent process per action
// component:  x <- x + theta (mu - x) dt + sigma sqrt(dt) N(0, 1).
class OuNoise {
 public:
  OuNoise(std::size_t dim, OuParams params, std::uint64_t seed)
      : params_(params), state_(dim, params.mu), rng_(seed) {
    if (!(params.theta > 0.0) || !(params.sigma >= 0.0) || !(params.dt > 0.0)) {
      throw std::invalid_argument("OU noise needs theta > 0, sigma >= 0, dt > 0");
    }
  }

  const OuParams& params() const { return params_; }
  const std::vector<double>& value() const { return state_; }
  void set_value(std::vector<double> x) { state_ = std::move(x); }

  void reset() { std::fill(state_.begin(), state_.end(), params_.mu); }

  // Advances the process one step and returns the new value.
  const std::vector<double>& sample() {
    const double diffusion = params_.sigma * std::sqrt(params_.dt);
    for (double& x : state_) {
      double kick = 0.0;
      if (params_.sigma > 0.0) kick = diffusion * normal_(rng_);
      x += params_.theta * (params_.mu - x) * params_.dt + kick;
    }
    return state_;
  }

  // Stationary variance of the discrete recurrence, k = theta * dt in (0, 2).
  double stationary_variance() const {
    const double k = params_.theta * params_.dt;
    return params_.sigma * params_.sigma * params_.dt / (2.0 * k - k * k);
  }

 private:
  OuParams params_;
  std::vector<double> state_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace trackrl

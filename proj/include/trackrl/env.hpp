#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "trackrl/agent.hpp"
#include "trackrl/observation.hpp"
#include "trackrl/random.hpp"
#include "trackrl/reward.hpp"
#include "trackrl/sim/stairs.hpp"
#include "trackrl/sim/toy.hpp"

namespace trackrl {

enum class Outcome { none, goal, flip, timeout };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::none: return "none";
    case Outcome::goal: return "goal";
    case Outcome::flip: return "flip";
    case Outcome::timeout: return "timeout";
  }
  return "?";
}

template <class S>
struct EnvStep {
  S state;
  double reward = 0.0;
  bool terminal = false;
  Outcome outcome = Outcome::none;
};

// reset() starts an episode; step() applies one action in [-1, 1]^n.
template <class E>
concept Environment = requires(E& env, const Action& a) {
  typename E::State;
  { env.action_dim() } -> std::convertible_to<std::size_t>;
  { env.reset() } -> std::same_as<typename E::State>;
  { env.step(a) } -> std::same_as<EnvStep<typename E::State>>;
};

struct StairsEnvConfig {
  sim::SimConfig sim;
  RewardParams reward;
  CameraLayout layout = CameraLayout::channels;
  bool actor_previous_action = false;
};

// Simulator + frame stacking + reward, one decision every 0.25 s.
class StairsEnv {
 public:
  using State = StackedState;

  StairsEnv(StairsEnvConfig config, std::uint64_t seed)
      : config_(config),
        sim_(config.sim),
        history_(config.sim.camera.near, config.sim.camera.far),
        seed_(seed) {
    validate(config_.reward);
  }

  std::size_t action_dim() const { return 2; }
  const StairsEnvConfig& config() const { return config_; }
  const sim::StairsSim& simulator() const { return sim_; }
  const sim::RobotState& robot() const { return robot_; }
  double time() const { return time_; }

  StackedState reset() {
    robot_ = sim_.reset(mix_seed(seed_, episode_++));
    time_ = 0.0;
    history_.clear();
    history_.bootstrap(sim_.render_depth(robot_, sim::CameraSide::front),
                       sim_.render_depth(robot_, sim::CameraSide::back), sim_.read_imu(robot_),
                       time_);
    return make_state({0.0, 0.0});
  }

  EnvStep<StackedState> step(const Action& action) {
    if (action.size() != 2) {
      throw std::invalid_argument("stairs env expects a 2-component action");
    }
    robot_ = sim_.step(robot_, action, kFrameInterval);
    return observe({action[0], action[1]});
  }

  // Replaces the robot pose (test hook for injected states) and observes it
  // as if a step had just ended there.
  EnvStep<StackedState> inject(const sim::RobotState& pose) {
    robot_ = pose;
    robot_.flipped = sim_.check_flip(robot_);
    robot_.goal = sim_.check_goal(robot_);
    return observe({0.0, 0.0});
  }

 private:
  EnvStep<StackedState> observe(std::array<double, 2> action) {
    time_ += kFrameInterval;
    history_.push_frame(sim_.render_depth(robot_, sim::CameraSide::front),
                        sim_.render_depth(robot_, sim::CameraSide::back), sim_.read_imu(robot_),
                        time_);
    EnvStep<StackedState> out;
    out.state = make_state(action);
    out.reward = final_reward(out.state.imu, robot_.progress, robot_.flipped, robot_.goal,
                              config_.reward);
    if (robot_.goal) {
      out.outcome = Outcome::goal;
    } else if (robot_.flipped) {
      out.outcome = Outcome::flip;
    }
    out.terminal = out.outcome != Outcome::none;
    return out;
  }

  StackedState make_state(std::array<double, 2> action) const {
    StackedState s = history_.build_state();
    s.layout = config_.layout;
    if (config_.actor_previous_action) s.previous_action = action;
    return s;
  }

  StairsEnvConfig config_;
  sim::StairsSim sim_;
  FrameHistory history_;
  std::uint64_t seed_;
  std::uint64_t episode_ = 0;
  sim::RobotState robot_;
  double time_ = 0.0;
};

struct ToyEnvConfig {
  std::size_t horizon = 20;
  double start = 0.5;
  bool random_start = false;  // draw x0 uniformly from [-1, 1] each episode
};

class ToyEnv {
 public:
  using State = sim::ToyState;

  ToyEnv(ToyEnvConfig config, std::uint64_t seed) : config_(config), rng_(seed) {
    if (config.horizon == 0) throw std::invalid_argument("toy horizon must be >= 1");
  }

  std::size_t action_dim() const { return 1; }
  const ToyEnvConfig& config() const { return config_; }

  sim::ToyState reset() {
    state_ = {};
    if (config_.random_start) {
      state_.x = std::uniform_real_distribution<double>(-1.0, 1.0)(rng_);
    } else {
      state_.x = config_.start;
    }
    return state_;
  }

  EnvStep<sim::ToyState> step(const Action& action) {
    if (action.size() != 1) throw std::invalid_argument("toy env expects a scalar action");
    if (!(action[0] >= -1.0 && action[0] <= 1.0)) {
      throw std::invalid_argument("toy action outside [-1, 1]");
    }
    const auto r = sim::toy_env_step(state_, action[0], config_.horizon);
    state_ = r.next;
    return {r.next, r.reward, r.terminal, r.terminal ? Outcome::timeout : Outcome::none};
  }

 private:
  ToyEnvConfig config_;
  std::mt19937_64 rng_;
  sim::ToyState state_;
};

}  // namespace trackrl

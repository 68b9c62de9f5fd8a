#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "trackrl/adam.hpp"
#include "trackrl/network.hpp"
#include "trackrl/ou_noise.hpp"
#include "trackrl/random.hpp"

namespace trackrl {

using Action = std::vector<double>;

// What the agent needs from an environment state: the actor's inputs and the
// critic's state inputs (the action tensor is appended as the critic's last
// branch).
template <class S>
concept AgentState = requires(const S& s) {
  { s.actor_inputs() } -> std::same_as<std::vector<Tensor>>;
  { s.critic_inputs() } -> std::same_as<std::vector<Tensor>>;
};

template <class S>
struct Transition {
  S state;
  Action action;
  double reward = 0.0;
  S next_state;
  bool terminal = false;
};

struct AgentConfig {
  double gamma = 0.99;
  double tau = 1e-5;
  AdamConfig actor_adam{};
  AdamConfig critic_adam{};
};

inline Action clamp_action(Action a) {
  for (double& v : a) v = std::clamp(v, -1.0, 1.0);
  return a;
}

// Actor, critic, their targets and the two optimizer states.
class AgentNets {
 public:
  AgentNets(NetworkSpec actor_spec, NetworkSpec critic_spec, const AgentConfig& config,
            std::uint64_t seed)
      : actor(std::move(actor_spec), mix_seed(seed, 1)),
        critic(std::move(critic_spec), mix_seed(seed, 2)),
        target_actor(actor),
        target_critic(critic),
        actor_adam(config.actor_adam, std::as_const(actor).parameters()),
        critic_adam(config.critic_adam, std::as_const(critic).parameters()) {
    if (critic.output_size() != 1) {
      throw std::invalid_argument("critic must have a scalar output");
    }
    const auto& action_branch = critic.spec().branches.back();
    if (action_branch.input_shape != Shape{actor.output_size()}) {
      throw std::invalid_argument("critic's last branch '" + action_branch.name +
                                  "' must take the actor output " +
                                  to_string(Shape{actor.output_size()}));
    }
  }

  std::uint64_t hash() const {
    return fnv1a(describe(critic.spec()), actor.hash());
  }
  std::size_t action_dim() const { return actor.output_size(); }

  Network actor;
  Network critic;
  Network target_actor;
  Network target_critic;
  AdamState actor_adam;
  AdamState critic_adam;
};

inline std::vector<Tensor> with_action(std::vector<Tensor> inputs, const Action& a) {
  inputs.push_back(Tensor::rank1(a));
  return inputs;
}

// DDPG agent operating on states of type S.
template <AgentState S>
class DdpgAgent {
 public:
  DdpgAgent(NetworkSpec actor_spec, NetworkSpec critic_spec, AgentConfig config,
            std::uint64_t seed)
      : config_(config),
        nets_(std::move(actor_spec), std::move(critic_spec), config, seed) {
    if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) {
      throw std::invalid_argument("gamma must lie in [0, 1]");
    }
    if (!(config.tau >= 0.0 && config.tau <= 1.0)) {
      throw std::invalid_argument("tau must lie in [0, 1]");
    }
  }

  AgentNets& nets() { return nets_; }
  const AgentNets& nets() const { return nets_; }
  const AgentConfig& config() const { return config_; }
  std::size_t action_dim() const { return nets_.action_dim(); }

  // Noise-free actor output.
  Action act(const S& state) const {
    const auto inputs = state.actor_inputs();
    return nets_.actor.predict(inputs).values();
  }

  // Actor output plus one OU sample, clamped to [-1, 1].
  Action select_action(const S& state, OuNoise& noise) const {
    Action a = act(state);
    const auto& n = noise.sample();
    if (n.size() != a.size()) {
      throw std::invalid_argument("noise dimension does not match action dimension");
    }
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += n[i];
    return clamp_action(std::move(a));
  }

  double q_value(const S& state, const Action& a) const {
    return nets_.critic.predict(with_action(state.critic_inputs(), a))[0];
  }

  // Bellman targets from the target nets, then one Adam step on the mean
  // squared error. Returns the loss before the step.
  double critic_update(std::span<const Transition<S>* const> batch) {
    return critic_update(batch, config_.gamma);
  }

  double critic_update(std::span<const Transition<S>* const> batch, double gamma) {
    if (batch.empty()) throw std::invalid_argument("critic_update: empty minibatch");
    const double m = static_cast<double>(batch.size());
    std::vector<double> targets(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& t = *batch[i];
      double y = t.reward;
      if (!t.terminal && gamma != 0.0) {
        const Action next = nets_.target_actor.predict(t.next_state.actor_inputs()).values();
        y += gamma * nets_.target_critic.predict(with_action(t.next_state.critic_inputs(), next))[0];
      }
      targets[i] = y;
    }
    auto& critic = nets_.critic;
    critic.zero_grad();
    double loss = 0.0;
    Tensor upstream({1});
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& t = *batch[i];
      const auto inputs = with_action(t.state.critic_inputs(), t.action);
      const double residual = critic.forward(inputs)[0] - targets[i];
      loss += residual * residual;
      upstream[0] = 2.0 * residual / m;
      critic.backward(upstream, GradientRequest::params_only());
    }
    const auto params = critic.parameters();
    const auto grads = critic.gradients();
    adam_step(params, grads, nets_.critic_adam);
    return loss / m;
  }

  // One Adam step ascending mean Q(s, mu(s)). Returns the mean Q before the
  // step.
  double actor_update(std::span<const Transition<S>* const> batch) {
    if (batch.empty()) throw std::invalid_argument("actor_update: empty minibatch");
    const double m = static_cast<double>(batch.size());
    auto& actor = nets_.actor;
    auto& critic = nets_.critic;
    actor.zero_grad();
    GradientRequest action_only;
    action_only.parameters = false;
    action_only.inputs.assign(critic.branch_count(), false);
    action_only.inputs.back() = true;
    const std::size_t action_branch = critic.branch_count() - 1;
    double mean_q = 0.0;
    Tensor upstream({1}, 1.0);
    for (const auto* t : batch) {
      const auto actor_in = t->state.actor_inputs();
      const Action a = actor.forward(actor_in).values();
      mean_q += critic.forward(with_action(t->state.critic_inputs(), a))[0];
      auto grads = critic.backward(upstream, action_only);
      Tensor dq_da = std::move(grads[action_branch]);
      for (double& g : dq_da.data()) g = -g / m;
      actor.backward(dq_da, GradientRequest::params_only());
    }
    const auto params = actor.parameters();
    const auto grads = actor.gradients();
    adam_step(params, grads, nets_.actor_adam);
    return mean_q / m;
  }

  void soft_update_targets() { soft_update_targets(config_.tau); }
  void soft_update_targets(double tau) {
    soft_update(nets_.target_critic, nets_.critic, tau);
    soft_update(nets_.target_actor, nets_.actor, tau);
  }

 private:
  AgentConfig config_;
  AgentNets nets_;
};

}  // namespace trackrl

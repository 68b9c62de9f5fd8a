#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "trackrl/agent.hpp"
#include "trackrl/env.hpp"
#include "trackrl/ou_noise.hpp"
#include "trackrl/random.hpp"
#include "trackrl/replay_memory.hpp"

namespace trackrl {

struct TrainingConfig {
  std::size_t episodes = 50;   // M
  std::size_t max_steps = 150; // T
  std::size_t batch_size = 32; // m
  std::size_t replay_capacity = 45000;
  double gamma = 0.99;
  double tau = 1e-5;
  double actor_lr = 1e-6;
  double critic_lr = 1e-6;
  OuParams ou;
  std::uint64_t seed = 1;
};

inline void validate(const TrainingConfig& c) {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(key) + ": " + what);
  };
  require(c.episodes >= 1, "episodes", "must be >= 1");
  require(c.max_steps >= 1, "max_steps", "must be >= 1");
  require(c.batch_size >= 1, "batch_size", "must be >= 1");
  require(c.replay_capacity >= c.batch_size, "replay_capacity", "must be >= batch_size");
  require(c.gamma > 0.0 && c.gamma <= 1.0, "gamma", "must lie in (0, 1]");
  require(c.tau > 0.0 && c.tau <= 1.0, "tau", "must lie in (0, 1]");
  require(c.actor_lr > 0.0, "actor_lr", "must be > 0");
  require(c.critic_lr > 0.0, "critic_lr", "must be > 0");
  require(c.ou.theta > 0.0, "ou_theta", "must be > 0");
  require(c.ou.sigma >= 0.0, "ou_sigma", "must be >= 0");
  require(c.ou.dt > 0.0, "ou_dt", "must be > 0");
}

inline AgentConfig agent_config(const TrainingConfig& c) {
  AgentConfig a;
  a.gamma = c.gamma;
  a.tau = c.tau;
  a.actor_adam.learning_rate = c.actor_lr;
  a.critic_adam.learning_rate = c.critic_lr;
  return a;
}

struct StepRecord {
  std::size_t episode = 0;
  std::size_t step = 0;
  double reward = 0.0;
  std::optional<double> critic_loss;
  std::optional<double> mean_q;
};

struct EpisodeRecord {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double episode_return = 0.0;
  Outcome outcome = Outcome::none;
  std::optional<double> mean_critic_loss;  // over this episode's updates
  std::optional<double> mean_q;
};

struct TrainingLog {
  std::vector<StepRecord> steps;
  std::vector<EpisodeRecord> episodes;
  std::size_t updates = 0;
};

struct TrainingHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpisodeRecord&)> on_episode;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t episode, std::size_t step, const std::string& what)
      : std::runtime_error("environment fault at episode " + std::to_string(episode) +
                           ", step " + std::to_string(step) + ": " + what),
        episode_(episode),
        step_(step) {}
  std::size_t episode() const { return episode_; }
  std::size_t step() const { return step_; }

 private:
  std::size_t episode_;
  std::size_t step_;
};

// The DDPG loop: per step act with OU noise, observe, store, then (once the
// memory holds a minibatch) update critic, actor and both targets.
template <Environment E>
TrainingLog run_training(E& env, DdpgAgent<typename E::State>& agent,
                         ReplayMemory<Transition<typename E::State>>& memory,
                         const TrainingConfig& config, const TrainingHooks& hooks = {}) {
  using S = typename E::State;
  validate(config);
  OuNoise noise(env.action_dim(), config.ou, mix_seed(config.seed, 3));
  std::mt19937_64 sampler(mix_seed(config.seed, 4));
  TrainingLog log;
  for (std::size_t episode = 0; episode < config.episodes; ++episode) {
    S state;
    try {
      state = env.reset();
    } catch (const std::exception& e) {
      throw TrainingError(episode, 0, e.what());
    }
    noise.reset();
    EpisodeRecord ep;
    ep.episode = episode;
    double loss_sum = 0.0, q_sum = 0.0;
    std::size_t updates = 0;
    for (std::size_t step = 0; step < config.max_steps; ++step) {
      const Action action = agent.select_action(state, noise);
      EnvStep<S> result;
      try {
        result = env.step(action);
      } catch (const std::exception& e) {
        throw TrainingError(episode, step, e.what());
      }
      if (!result.terminal && step + 1 == config.max_steps) {
        result.terminal = true;
        result.outcome = Outcome::timeout;
      }
      memory.push({state, action, result.reward, result.state, result.terminal});

      StepRecord rec;
      rec.episode = episode;
      rec.step = step;
      rec.reward = result.reward;
      if (memory.size() >= config.batch_size) {
        const auto batch = memory.sample(config.batch_size, sampler);
        rec.critic_loss = agent.critic_update(batch);
        rec.mean_q = agent.actor_update(batch);
        agent.soft_update_targets();
        loss_sum += *rec.critic_loss;
        q_sum += *rec.mean_q;
        ++updates;
        ++log.updates;
      }
      ep.episode_return += result.reward;
      ep.steps = step + 1;
      log.steps.push_back(rec);
      if (hooks.on_step) hooks.on_step(rec);
      state = std::move(result.state);
      if (result.terminal) {
        ep.outcome = result.outcome;
        break;
      }
    }
    if (updates > 0) {
      ep.mean_critic_loss = loss_sum / static_cast<double>(updates);
      ep.mean_q = q_sum / static_cast<double>(updates);
    }
    log.episodes.push_back(ep);
    if (hooks.on_episode) hooks.on_episode(ep);
  }
  return log;
}

struct EvaluationReport {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double flip_rate = 0.0;
  double mean_return = 0.0;
  double mean_steps = 0.0;
};

// Rolls out `policy` (state -> action) without exploration noise.
template <Environment E, class Policy>
EvaluationReport evaluate_policy(E& env, Policy&& policy, std::size_t episodes,
                                 std::size_t max_steps) {
  if (episodes == 0) throw std::invalid_argument("evaluation needs >= 1 episode");
  EvaluationReport rep;
  rep.episodes = episodes;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto state = env.reset();
    double ret = 0.0;
    std::size_t steps = 0;
    Outcome outcome = Outcome::timeout;
    for (std::size_t k = 0; k < max_steps; ++k) {
      auto r = env.step(clamp_action(policy(state)));
      ret += r.reward;
      steps = k + 1;
      if (r.terminal) {
        outcome = r.outcome;
        break;
      }
      state = std::move(r.state);
    }
    rep.mean_return += ret;
    rep.mean_steps += static_cast<double>(steps);
    if (outcome == Outcome::goal) rep.success_rate += 1.0;
    if (outcome == Outcome::flip) rep.flip_rate += 1.0;
  }
  const double n = static_cast<double>(episodes);
  rep.mean_return /= n;
  rep.mean_steps /= n;
  rep.success_rate /= n;
  rep.flip_rate /= n;
  return rep;
}

}  // namespace trackrl

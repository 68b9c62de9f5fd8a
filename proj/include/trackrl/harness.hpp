#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trackrl/checkpoint.hpp"
#include "trackrl/config.hpp"
#include "trackrl/env.hpp"
#include "trackrl/networks.hpp"
#include "trackrl/random.hpp"
#include "trackrl/sim/toy.hpp"
#include "trackrl/training.hpp"

namespace trackrl {

namespace fs = std::filesystem;

// Failure inside a run, tagged with the seed it happened under.
class RunError : public std::runtime_error {
 public:
  RunError(std::uint64_t seed, const std::string& what)
      : std::runtime_error("seed " + std::to_string(seed) + ": " + what), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

inline constexpr const char* kMetricsHeader =
    "kind,episode,step,reward,critic_loss,mean_q,episode_return,outcome";

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_real(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string();
}

// Step rows carry step = 0..n-1; the episode row that closes them has step = n.
inline std::string metrics_row(const StepRecord& r) {
  return "step," + std::to_string(r.episode) + "," + std::to_string(r.step) + "," +
         format_real(r.reward) + "," + format_real(r.critic_loss) + "," + format_real(r.mean_q) +
         ",,";
}

inline std::string metrics_row(const EpisodeRecord& r) {
  return "episode," + std::to_string(r.episode) + "," + std::to_string(r.steps) + ",," +
         format_real(r.mean_critic_loss) + "," + format_real(r.mean_q) + "," +
         format_real(r.episode_return) + "," + to_string(r.outcome);
}

inline NetworkSpec actor_spec_for(const ExperimentConfig& c) {
  return c.env == EnvKind::toy ? toy_actor_spec(c.toy_hidden, c.leaky_alpha)
                               : stairs_actor_spec(network_options(c));
}

inline NetworkSpec critic_spec_for(const ExperimentConfig& c) {
  return c.env == EnvKind::toy ? toy_critic_spec(c.toy_hidden, c.leaky_alpha)
                               : stairs_critic_spec(network_options(c));
}

// Fixed-start toy env used for greedy scoring.
inline ToyEnvConfig toy_eval_config(const ExperimentConfig& c) {
  return {c.toy.horizon, c.toy.start, false};
}

// Greedy return must reach opt - (1 - fraction)|opt|.
inline bool within_fraction(double value, double optimum, double fraction) {
  return value >= optimum - (1.0 - fraction) * std::abs(optimum);
}

struct SeedResult {
  std::uint64_t seed = 0;
  fs::path dir;
  std::size_t episodes = 0;
  std::size_t total_steps = 0;
  std::size_t goals = 0;
  std::size_t flips = 0;
  std::size_t timeouts = 0;
  double best_episode_return = -INFINITY;
  std::optional<double> best_greedy_return;
  std::optional<std::size_t> first_reach_step;  // env steps when greedy first met the toy target
  EvaluationReport final_eval;
  std::optional<double> reference_return;  // toy optimum from the fixed start
  double wall_seconds = 0.0;
  std::vector<EpisodeRecord> episode_log;
};

struct RunSummary {
  std::vector<SeedResult> seeds;
  std::size_t reaching_target = 0;  // toy only
};

namespace detail {

template <class Env>
EvaluationReport greedy_eval(Env& env, const AgentNets& nets, std::size_t episodes,
                             std::size_t max_steps) {
  return evaluate_policy(
      env, [&](const typename Env::State& s) { return nets.actor.predict(s.actor_inputs()).values(); },
      episodes, max_steps);
}

template <class Env, class MakeEvalEnv>
SeedResult train_seed(const ExperimentConfig& cfg, std::uint64_t seed, Env env,
                      MakeEvalEnv make_eval_env, std::optional<double> reference) {
  using S = typename Env::State;
  const auto start = std::chrono::steady_clock::now();
  SeedResult res;
  res.seed = seed;
  res.reference_return = reference;
  res.dir = fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
  fs::create_directories(res.dir);

  TrainingConfig tc = cfg.training;
  tc.seed = seed;
  DdpgAgent<S> agent(actor_spec_for(cfg), critic_spec_for(cfg), agent_config(tc), seed);
  ReplayMemory<Transition<S>> memory(tc.replay_capacity);

  std::ofstream csv(res.dir / "metrics.csv", std::ios::trunc);
  if (!csv) throw RunError(seed, "cannot write " + (res.dir / "metrics.csv").string());
  csv << kMetricsHeader << '\n' << std::flush;

  const std::string best_path = (res.dir / "best.ckpt").string();
  std::optional<double> best_score;
  auto consider_best = [&](double score) {
    if (!best_score || score > *best_score) {
      best_score = score;
      save_checkpoint(best_path, agent.nets());
    }
  };

  std::size_t steps_so_far = 0;
  TrainingHooks hooks;
  hooks.on_step = [&](const StepRecord& r) {
    csv << metrics_row(r) << '\n' << std::flush;
    ++steps_so_far;
  };
  hooks.on_episode = [&](const EpisodeRecord& r) {
    csv << metrics_row(r) << '\n' << std::flush;
    res.best_episode_return = std::max(res.best_episode_return, r.episode_return);
    if (cfg.eval_interval > 0 && (r.episode + 1) % cfg.eval_interval == 0) {
      auto eval_env = make_eval_env();
      const auto rep = greedy_eval(eval_env, agent.nets(), cfg.eval_episodes, tc.max_steps);
      if (!res.best_greedy_return || rep.mean_return > *res.best_greedy_return) {
        res.best_greedy_return = rep.mean_return;
      }
      if (reference && !res.first_reach_step && within_fraction(rep.mean_return, *reference, 0.9)) {
        res.first_reach_step = steps_so_far;
      }
      consider_best(rep.mean_return);
    } else if (cfg.eval_interval == 0) {
      consider_best(r.episode_return);
    }
  };

  TrainingLog log;
  try {
    log = run_training(env, agent, memory, tc, hooks);
  } catch (const std::exception& e) {
    throw RunError(seed, e.what());
  }

  save_checkpoint((res.dir / "final.ckpt").string(), agent.nets());
  if (!best_score) save_checkpoint(best_path, agent.nets());
  auto eval_env = make_eval_env();
  res.final_eval = greedy_eval(eval_env, agent.nets(), cfg.eval_episodes, tc.max_steps);
  if (reference && !res.first_reach_step &&
      within_fraction(res.final_eval.mean_return, *reference, 0.9)) {
    res.first_reach_step = steps_so_far;
  }
  if (!res.best_greedy_return || res.final_eval.mean_return > *res.best_greedy_return) {
    res.best_greedy_return = res.final_eval.mean_return;
  }

  res.episodes = log.episodes.size();
  res.total_steps = log.steps.size();
  for (const auto& ep : log.episodes) {
    if (ep.outcome == Outcome::goal) ++res.goals;
    if (ep.outcome == Outcome::flip) ++res.flips;
    if (ep.outcome == Outcome::timeout) ++res.timeouts;
  }
  res.episode_log = std::move(log.episodes);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline void write_seed_summary(std::ostream& os, const SeedResult& r, const std::string& prefix) {
  os << prefix << "episodes = " << r.episodes << "\n";
  os << prefix << "steps = " << r.total_steps << "\n";
  os << prefix << "goal = " << r.goals << "\n";
  os << prefix << "flip = " << r.flips << "\n";
  os << prefix << "timeout = " << r.timeouts << "\n";
  os << prefix << "best_episode_return = " << format_real(r.best_episode_return) << "\n";
  os << prefix << "greedy_success_rate = " << format_real(r.final_eval.success_rate) << "\n";
  os << prefix << "greedy_flip_rate = " << format_real(r.final_eval.flip_rate) << "\n";
  os << prefix << "greedy_mean_return = " << format_real(r.final_eval.mean_return) << "\n";
  os << prefix << "greedy_mean_steps = " << format_real(r.final_eval.mean_steps) << "\n";
  if (r.best_greedy_return) {
    os << prefix << "best_greedy_return = " << format_real(*r.best_greedy_return) << "\n";
  }
  if (r.reference_return) {
    os << prefix << "optimal_return = " << format_real(*r.reference_return) << "\n";
    os << prefix << "reached_90pct = " << (r.first_reach_step ? "true" : "false") << "\n";
    if (r.first_reach_step) os << prefix << "reached_at_step = " << *r.first_reach_step << "\n";
  }
  os << prefix << "wall_seconds = " << format_real(r.wall_seconds) << "\n";
}

}  // namespace detail

// One training run per seed under cfg.out_dir/seed_<n>/: metrics.csv,
// final.ckpt, best.ckpt, summary.txt; plus cfg.out_dir/summary.txt.
inline RunSummary run(const ExperimentConfig& cfg) {
  validate(cfg);
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream os(fs::path(cfg.out_dir) / "config.txt", std::ios::trunc);
    os << print_config(cfg);
  }
  RunSummary summary;
  for (std::uint64_t seed : cfg.seeds) {
    SeedResult r;
    if (cfg.env == EnvKind::toy) {
      const double opt = sim::toy_optimal_return(
          cfg.toy.start, std::min(cfg.toy.horizon, cfg.training.max_steps));
      r = detail::train_seed(cfg, seed, ToyEnv(cfg.toy, mix_seed(seed, 5)),
                             [&] { return ToyEnv(toy_eval_config(cfg), 0); }, opt);
      if (r.first_reach_step) ++summary.reaching_target;
    } else {
      const auto ec = stairs_env_config(cfg);
      r = detail::train_seed(cfg, seed, StairsEnv(ec, mix_seed(seed, 5)),
                             [&, seed] { return StairsEnv(ec, mix_seed(seed, 6)); }, std::nullopt);
    }
    std::ofstream os(r.dir / "summary.txt", std::ios::trunc);
    os << "seed = " << r.seed << "\n";
    detail::write_seed_summary(os, r, "");
    summary.seeds.push_back(std::move(r));
  }
  std::ofstream os(fs::path(cfg.out_dir) / "summary.txt", std::ios::trunc);
  os << "env = " << to_string(cfg.env) << "\n";
  os << "topology = " << to_string(cfg.topology) << "\n";
  os << "seeds = " << summary.seeds.size() << "\n";
  if (cfg.env == EnvKind::toy) {
    os << "seeds_reaching_90pct = " << summary.reaching_target << "\n";
  }
  for (const auto& r : summary.seeds) {
    detail::write_seed_summary(os, r, "seed_" + std::to_string(r.seed) + ".");
  }
  return summary;
}

// Ordinary least-squares slope of ys against 0, 1, 2, ...
inline double trend_slope(const std::vector<double>& ys) {
  const std::size_t n = ys.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += static_cast<double>(i);
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (ys[i] - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline double window_mean(const std::vector<double>& ys, std::size_t window, bool from_end) {
  if (ys.empty()) return NAN;
  const std::size_t k = std::min(window, ys.size());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += from_end ? ys[ys.size() - 1 - i] : ys[i];
  return s / static_cast<double>(k);
}

struct SeriesStats {
  std::uint64_t seed = 0;
  std::vector<std::size_t> episode;  // episodes that had at least one update
  std::vector<double> loss;          // episode-mean critic loss
  std::vector<double> mean_q;        // episode-mean Q
  double initial_window_loss = NAN;
  double final_window_loss = NAN;
  double loss_slope = 0.0;
  double mean_q_slope = 0.0;
};

inline SeriesStats series_stats(std::uint64_t seed, const std::vector<EpisodeRecord>& log,
                                std::size_t window = 5) {
  SeriesStats s;
  s.seed = seed;
  for (const auto& ep : log) {
    if (!ep.mean_critic_loss) continue;
    s.episode.push_back(ep.episode);
    s.loss.push_back(*ep.mean_critic_loss);
    s.mean_q.push_back(*ep.mean_q);
  }
  s.initial_window_loss = window_mean(s.loss, window, false);
  s.final_window_loss = window_mean(s.loss, window, true);
  s.loss_slope = trend_slope(s.loss);
  s.mean_q_slope = trend_slope(s.mean_q);
  return s;
}

struct ComparisonReport {
  std::vector<SeriesStats> conv2d;
  std::vector<SeriesStats> conv3d;
  RunSummary conv2d_run;
  RunSummary conv3d_run;
};

// Trains both topologies on the same seeds into out_dir/conv2d and
// out_dir/conv3d, then writes comparison.txt and comparison_series.csv.
inline ComparisonReport compare_topologies(const ExperimentConfig& cfg) {
  validate(cfg);
  if (cfg.env != EnvKind::stairs) {
    throw ConfigError("env", "the topology comparison runs on the stairs env");
  }
  ComparisonReport rep;
  for (Topology t : {Topology::conv2d, Topology::conv3d}) {
    ExperimentConfig arm = cfg;
    arm.topology = t;
    arm.out_dir = (fs::path(cfg.out_dir) / to_string(t)).string();
    RunSummary summary = run(arm);
    auto& stats = t == Topology::conv2d ? rep.conv2d : rep.conv3d;
    for (const auto& r : summary.seeds) stats.push_back(series_stats(r.seed, r.episode_log));
    (t == Topology::conv2d ? rep.conv2d_run : rep.conv3d_run) = std::move(summary);
  }

  std::ofstream series(fs::path(cfg.out_dir) / "comparison_series.csv", std::ios::trunc);
  series << "topology,seed,episode,critic_loss,mean_q\n";
  std::ofstream txt(fs::path(cfg.out_dir) / "comparison.txt", std::ios::trunc);
  for (Topology t : {Topology::conv2d, Topology::conv3d}) {
    const auto& stats = t == Topology::conv2d ? rep.conv2d : rep.conv3d;
    double final_sum = 0.0;
    for (const auto& s : stats) {
      const std::string p = std::string(to_string(t)) + ".seed_" + std::to_string(s.seed) + ".";
      txt << p << "series_length = " << s.loss.size() << "\n";
      txt << p << "initial_window_loss = " << format_real(s.initial_window_loss) << "\n";
      txt << p << "final_window_loss = " << format_real(s.final_window_loss) << "\n";
      txt << p << "loss_slope = " << format_real(s.loss_slope) << "\n";
      txt << p << "mean_q_slope = " << format_real(s.mean_q_slope) << "\n";
      txt << p << "loss_decreased = "
          << (s.final_window_loss < s.initial_window_loss ? "true" : "false") << "\n";
      final_sum += s.final_window_loss;
      for (std::size_t i = 0; i < s.loss.size(); ++i) {
        series << to_string(t) << "," << s.seed << "," << s.episode[i] << ","
               << format_real(s.loss[i]) << "," << format_real(s.mean_q[i]) << "\n";
      }
    }
    txt << to_string(t) << ".mean_final_window_loss = "
        << format_real(final_sum / static_cast<double>(stats.size())) << "\n";
  }
  double f2 = 0.0, f3 = 0.0;
  for (const auto& s : rep.conv2d) f2 += s.final_window_loss;
  for (const auto& s : rep.conv3d) f3 += s.final_window_loss;
  txt << "conv2d_lower_final_loss = " << (f2 < f3 ? "true" : "false") << "\n";
  return rep;
}

// Greedy rollouts of a saved actor. The checkpoint must have been produced
// by networks matching cfg; it is only read.
inline EvaluationReport evaluate(const ExperimentConfig& cfg, const std::string& checkpoint,
                                 std::size_t episodes) {
  validate(cfg);
  const std::uint64_t seed = cfg.seeds.front();
  AgentNets nets(actor_spec_for(cfg), critic_spec_for(cfg), agent_config(cfg.training), seed);
  load_checkpoint(checkpoint, nets);
  if (cfg.env == EnvKind::toy) {
    ToyEnv env(toy_eval_config(cfg), 0);
    return detail::greedy_eval(env, nets, episodes, cfg.training.max_steps);
  }
  StairsEnv env(stairs_env_config(cfg), mix_seed(seed, 6));
  return detail::greedy_eval(env, nets, episodes, cfg.training.max_steps);
}

inline void write_report(std::ostream& os, const EvaluationReport& r) {
  os << "episodes = " << r.episodes << "\n";
  os << "success_rate = " << format_real(r.success_rate) << "\n";
  os << "flip_rate = " << format_real(r.flip_rate) << "\n";
  os << "mean_return = " << format_real(r.mean_return) << "\n";
  os << "mean_steps = " << format_real(r.mean_steps) << "\n";
}

}  // namespace trackrl

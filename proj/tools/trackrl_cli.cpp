#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "trackrl/checkpoint.hpp"
#include "trackrl/config.hpp"
#include "trackrl/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string topology;
  std::string env;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Key-value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Single seed, replaces the config's seed list");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--topology", o.topology, "Camera branch topology")
      ->check(CLI::IsMember({"conv2d", "conv3d"}));
  cmd->add_option("--env", o.env, "Environment")->check(CLI::IsMember({"stairs", "toy"}));
}

trackrl::ExperimentConfig resolve(const CommonOptions& o) {
  trackrl::ExperimentConfig cfg =
      o.config.empty() ? trackrl::ExperimentConfig{} : trackrl::load_config(o.config);
  if (o.seed) cfg.seeds = {*o.seed};
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.topology.empty()) cfg.topology = trackrl::parse_topology(o.topology);
  if (!o.env.empty()) cfg.env = trackrl::parse_env_kind(o.env);
  trackrl::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flipper-robot stair climbing with DDPG"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, compare_opts, print_opts;
  auto* train = app.add_subcommand("train", "Train one agent per seed");
  add_common(train, train_opts);
  auto* evaluate = app.add_subcommand("evaluate", "Greedy rollouts of a checkpoint");
  add_common(evaluate, eval_opts);
  std::string checkpoint;
  std::size_t episodes = 10;
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--episodes", episodes, "Evaluation episodes")
      ->check(CLI::PositiveNumber);
  auto* compare = app.add_subcommand("compare", "Train conv2d and conv3d on the same seeds");
  add_common(compare, compare_opts);
  auto* print = app.add_subcommand("print-config", "Print the fully resolved config");
  add_common(print, print_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  trackrl::ExperimentConfig cfg;
  try {
    if (*train) cfg = resolve(train_opts);
    if (*evaluate) cfg = resolve(eval_opts);
    if (*compare) cfg = resolve(compare_opts);
    if (*print) cfg = resolve(print_opts);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*print) {
      std::cout << trackrl::print_config(cfg);
    } else if (*train) {
      const auto summary = trackrl::run(cfg);
      for (const auto& r : summary.seeds) {
        std::cout << "seed " << r.seed << ": " << r.episodes << " episodes, goal " << r.goals
                  << ", flip " << r.flips << ", timeout " << r.timeouts << ", greedy return "
                  << r.final_eval.mean_return << "\n";
      }
      std::cout << "results in " << cfg.out_dir << "\n";
    } else if (*compare) {
      const auto rep = trackrl::compare_topologies(cfg);
      for (const auto* arm : {&rep.conv2d, &rep.conv3d}) {
        for (const auto& s : *arm) {
          std::cout << (arm == &rep.conv2d ? "conv2d" : "conv3d") << " seed " << s.seed
                    << ": loss " << s.initial_window_loss << " -> " << s.final_window_loss
                    << ", loss slope " << s.loss_slope << ", mean-Q slope " << s.mean_q_slope
                    << "\n";
        }
      }
      std::cout << "report in " << cfg.out_dir << "/comparison.txt\n";
    } else if (*evaluate) {
      trackrl::write_report(std::cout, trackrl::evaluate(cfg, checkpoint, episodes));
    }
  } catch (const trackrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "trackrl/harness.hpp"

using namespace trackrl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "trackrl_harness_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

ExperimentConfig toy_config(const fs::path& out, std::size_t episodes, std::size_t max_steps) {
  auto c = parse_config_string("env = toy\nbatch_size = 4\ntoy_hidden = 8\ntau = 0.01\n");
  c.training.episodes = episodes;
  c.training.max_steps = max_steps;
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST(Metrics, RowFormat) {
  StepRecord s{3, 7, -0.25, std::nullopt, std::nullopt};
  EXPECT_EQ(metrics_row(s), "step,3,7,-0.25,,,,");
  s.critic_loss = 0.5;
  s.mean_q = -1.0;
  EXPECT_EQ(metrics_row(s), "step,3,7,-0.25,0.5,-1,,");
  EpisodeRecord e;
  e.episode = 3;
  e.steps = 8;
  e.episode_return = 0.1;
  e.outcome = Outcome::goal;
  EXPECT_EQ(metrics_row(e), "episode,3,8,,,,0.10000000000000001,goal");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(Harness, WithinFraction) {
  EXPECT_TRUE(within_fraction(-0.3299, -0.30, 0.9));
  EXPECT_FALSE(within_fraction(-0.3301, -0.30, 0.9));
  EXPECT_TRUE(within_fraction(9.0, 10.0, 0.9));
  EXPECT_FALSE(within_fraction(8.9, 10.0, 0.9));
}

TEST(Harness, ToyRunWritesWellFormedCsv) {
  const auto out = fresh_dir("toy");
  const auto summary = run(toy_config(out, 2, 5));
  ASSERT_EQ(summary.seeds.size(), 1u);
  const auto rows = lines(out / "seed_1" / "metrics.csv");
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0], kMetricsHeader);
  std::size_t steps = 0, episodes = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    ASSERT_EQ(cells.size(), 8u) << rows[i];
    if (cells[0] == "step") ++steps;
    else if (cells[0] == "episode") ++episodes;
    else ADD_FAILURE() << rows[i];
  }
  EXPECT_LE(steps, 10u);
  EXPECT_EQ(steps, summary.seeds[0].total_steps);
  EXPECT_EQ(episodes, 2u);
  EXPECT_TRUE(fs::exists(out / "seed_1" / "final.ckpt"));
  EXPECT_TRUE(fs::exists(out / "seed_1" / "best.ckpt"));
  EXPECT_TRUE(fs::exists(out / "summary.txt"));
  EXPECT_EQ(parse_config_string(slurp(out / "config.txt")).training.episodes, 2u);
}

TEST(Harness, IdenticalConfigsGiveIdenticalCsv) {
  const auto a = fresh_dir("same_a"), b = fresh_dir("same_b");
  run(toy_config(a, 3, 20));
  run(toy_config(b, 3, 20));
  EXPECT_EQ(slurp(a / "seed_1" / "metrics.csv"), slurp(b / "seed_1" / "metrics.csv"));
}

TEST(Harness, EvaluateZeroActorDoesNothing) {
  const auto out = fresh_dir("zero");
  fs::create_directories(out);
  const auto c = toy_config(out, 1, 20);
  AgentNets nets(actor_spec_for(c), critic_spec_for(c), agent_config(c.training), 1);
  nets.actor.set_flat_parameters(std::vector<double>(nets.actor.parameter_count(), 0.0));
  const auto path = (out / "zero.ckpt").string();
  save_checkpoint(path, nets);
  const auto rep = evaluate(c, path, 3);
  EXPECT_DOUBLE_EQ(rep.mean_return, -20.0 * 0.5 * 0.5);
  EXPECT_EQ(rep.mean_steps, 20.0);

  std::ostringstream first, second;
  write_report(first, rep);
  write_report(second, evaluate(c, path, 3));
  EXPECT_EQ(first.str(), second.str());
}

TEST(Harness, EvaluateRejectsMismatchedCheckpoint) {
  const auto out = fresh_dir("mismatch");
  auto c = toy_config(out, 1, 5);
  run(c);
  c.toy_hidden = 16;
  EXPECT_THROW(evaluate(c, (out / "seed_1" / "final.ckpt").string(), 1), CheckpointError);
}

TEST(Harness, CompareRequiresStairs) {
  EXPECT_THROW(compare_topologies(toy_config(fresh_dir("cmp_toy"), 1, 1)), ConfigError);
}

TEST(Harness, SeriesStatistics) {
  EXPECT_DOUBLE_EQ(trend_slope({1.0, 3.0, 5.0, 7.0}), 2.0);
  EXPECT_EQ(trend_slope({4.0}), 0.0);
  EXPECT_DOUBLE_EQ(window_mean({1, 2, 3, 4, 5, 6}, 2, false), 1.5);
  EXPECT_DOUBLE_EQ(window_mean({1, 2, 3, 4, 5, 6}, 2, true), 5.5);
  std::vector<EpisodeRecord> log(3);
  for (std::size_t i = 0; i < 3; ++i) log[i].episode = i;
  log[1].mean_critic_loss = 2.0;
  log[1].mean_q = -1.0;
  log[2].mean_critic_loss = 1.0;
  log[2].mean_q = -0.5;
  const auto s = series_stats(7, log, 1);
  EXPECT_EQ(s.episode, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(s.initial_window_loss, 2.0);
  EXPECT_EQ(s.final_window_loss, 1.0);
  EXPECT_DOUBLE_EQ(s.loss_slope, -1.0);
}

TEST(Harness, CompareWritesMatchingSeries) {
  const auto out = fresh_dir("compare");
  auto c = parse_config_string("batch_size = 2\nepisodes = 2\nmax_steps = 3\n");
  c.out_dir = out.string();
  const auto rep = compare_topologies(c);
  ASSERT_EQ(rep.conv2d.size(), 1u);
  ASSERT_EQ(rep.conv3d.size(), 1u);
  EXPECT_EQ(rep.conv2d[0].loss.size(), rep.conv3d[0].loss.size());
  EXPECT_EQ(rep.conv2d[0].loss.size(), 2u);

  std::vector<std::string> episode_losses;
  for (const auto& row : lines(out / "conv2d" / "seed_1" / "metrics.csv")) {
    const auto cells = split(row);
    if (cells[0] == "episode") episode_losses.push_back(cells[4]);
  }
  std::vector<std::string> series_losses;
  for (const auto& row : lines(out / "comparison_series.csv")) {
    const auto cells = split(row);
    if (cells[0] == "conv2d") series_losses.push_back(cells[3]);
  }
  EXPECT_EQ(series_losses, episode_losses);
  const auto txt = slurp(out / "comparison.txt");
  EXPECT_NE(txt.find("conv2d_lower_final_loss = "), std::string::npos);
  EXPECT_NE(txt.find("conv3d.seed_1.loss_decreased = "), std::string::npos);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "trackrl/config.hpp"

using namespace trackrl;
namespace fs = std::filesystem;

namespace {

std::string error_key(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "trackrl_config_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, MinimalFileKeepsDefaults) {
  const auto c = parse_config_string("topology = conv2d\n");
  EXPECT_EQ(c.topology, Topology::conv2d);
  EXPECT_EQ(c.env, EnvKind::stairs);
  EXPECT_EQ(c.training.episodes, 50u);
  EXPECT_EQ(c.training.max_steps, 150u);
  EXPECT_EQ(c.training.replay_capacity, 45000u);
  EXPECT_EQ(c.training.tau, 1e-5);
  EXPECT_EQ(c.training.actor_lr, 1e-6);
  EXPECT_EQ(c.training.critic_lr, 1e-6);
  EXPECT_EQ(c.reward.c_stuck, 5.0);
  EXPECT_EQ(c.reward.flip_penalty, -1000.0);
  EXPECT_EQ(c.reward.goal_bonus, 100.0);
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{1});
}

TEST(Config, ParsesValuesAndComments) {
  const auto c = parse_config_string(
      "# experiment\n"
      "env = toy   # inline\n"
      "seeds = 3, 4,5\n"
      "\n"
      "gamma = 0.95\n"
      "topology = conv3d\n"
      "actor_previous_action = true\n"
      "rise = 0.2\n");
  EXPECT_EQ(c.env, EnvKind::toy);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(c.training.gamma, 0.95);
  EXPECT_EQ(c.topology, Topology::conv3d);
  EXPECT_TRUE(c.actor_previous_action);
  EXPECT_EQ(c.sim.stairs.rise, 0.2);
}

TEST(Config, OutOfRangeValueNamesKey) {
  EXPECT_EQ(error_key("tau = 2.0\n"), "tau");
  EXPECT_EQ(error_key("gamma = 0\n"), "gamma");
  EXPECT_EQ(error_key("batch_size = 0\n"), "batch_size");
  EXPECT_EQ(error_key("seeds =\n"), "seeds");
  EXPECT_EQ(error_key("rise = -1\n"), "rise");
}

TEST(Config, MalformedValueNamesKey) {
  EXPECT_EQ(error_key("gamma = fast\n"), "gamma");
  EXPECT_EQ(error_key("episodes = -3\n"), "episodes");
  EXPECT_EQ(error_key("topology = conv4d\n"), "topology");
  EXPECT_EQ(error_key("abs_accel = maybe\n"), "abs_accel");
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_EQ(error_key("gama = 0.9\n"), "gama");
  try {
    parse_config_string("gama = 0.9\n");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos);
  }
  EXPECT_THROW(parse_config_string("no equals sign\n"), ConfigError);
}

TEST(Config, PrintRoundTrips) {
  auto c = parse_config_string("env = toy\nseeds = 1,2\ngamma = 0.1234567890123\nc_mov = 7.25\n");
  const std::string text = print_config(c);
  const auto d = parse_config_string(text);
  EXPECT_EQ(print_config(d), text);
  EXPECT_EQ(d.training.gamma, 0.1234567890123);
  EXPECT_EQ(d.reward.c_mov, 7.25);
  EXPECT_EQ(d.seeds, (std::vector<std::uint64_t>{1, 2}));
}

TEST(Config, ScenarioFileIsRelativeToConfig) {
  const auto dir = temp_dir();
  {
    std::ofstream(dir / "tall.scenario") << "rise = 0.19\nsteps = 3\n";
    std::ofstream(dir / "exp.cfg") << "scenario = tall.scenario\nepisodes = 7\n";
    std::ofstream(dir / "bad.scenario") << "gamma = 0.5\n";
    std::ofstream(dir / "bad.cfg") << "scenario = bad.scenario\n";
  }
  const auto c = load_config(dir / "exp.cfg");
  EXPECT_EQ(c.sim.stairs.rise, 0.19);
  EXPECT_EQ(c.sim.stairs.steps, 3u);
  EXPECT_EQ(c.training.episodes, 7u);
  try {
    load_config(dir / "bad.cfg");
    FAIL() << "training key accepted in scenario file";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "gamma");
  }
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config(temp_dir() / "does_not_exist.cfg"), ConfigError);
  EXPECT_EQ(error_key("scenario = /nonexistent/x.scenario\n"), "scenario");
}

TEST(Config, DerivedSettings) {
  const auto c = parse_config_string("topology = conv3d\nleaky_alpha = 0.2\n");
  EXPECT_EQ(stairs_env_config(c).layout, CameraLayout::volume);
  EXPECT_EQ(network_options(c).leaky_alpha, 0.2);
  EXPECT_EQ(network_options(c).topology, Topology::conv3d);
}

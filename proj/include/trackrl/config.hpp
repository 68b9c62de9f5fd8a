#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trackrl/env.hpp"
#include "trackrl/networks.hpp"
#include "trackrl/reward.hpp"
#include "trackrl/sim/scenario.hpp"
#include "trackrl/training.hpp"

namespace trackrl {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class EnvKind { stairs, toy };

inline const char* to_string(EnvKind e) { return e == EnvKind::stairs ? "stairs" : "toy"; }

inline EnvKind parse_env_kind(const std::string& s) {
  if (s == "stairs") return EnvKind::stairs;
  if (s == "toy") return EnvKind::toy;
  throw std::invalid_argument("env must be stairs or toy, got '" + s + "'");
}

struct ExperimentConfig {
  EnvKind env = EnvKind::stairs;
  Topology topology = Topology::conv2d;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = "runs";
  std::size_t eval_episodes = 5;
  std::size_t eval_interval = 0;  // greedy evaluation every N training episodes; 0 = off
  TrainingConfig training;
  RewardParams reward;
  sim::SimConfig sim;
  ToyEnvConfig toy{20, 0.5, true};
  double leaky_alpha = 0.01;
  bool actor_previous_action = false;
  std::size_t toy_hidden = 64;
};

// "key = value" lines; '#' starts a comment. Keys keep file order.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in,
                                                                         const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", origin + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key, "not a number: '" + v + "'");
  return d;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError(key, "not a non-negative integer: '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline std::string format_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

struct Field {
  std::string key;
  bool scenario = false;  // allowed in a scenario file
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Access>
Field real(std::string key, Access acc, bool scenario = false) {
  return {key, scenario,
          [acc, key](ExperimentConfig& c, const std::string& v) { acc(c) = parse_double(key, v); },
          [acc](const ExperimentConfig& c) {
            return format_double(acc(const_cast<ExperimentConfig&>(c)));
          }};
}

template <class Access>
Field count(std::string key, Access acc, bool scenario = false) {
  return {key, scenario,
          [acc, key](ExperimentConfig& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(acc(c))>;
            const auto n = parse_uint(key, v);
            if (n > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
              throw ConfigError(key, "value too large");
            }
            acc(c) = static_cast<T>(n);
          },
          [acc](const ExperimentConfig& c) {
            return std::to_string(acc(const_cast<ExperimentConfig&>(c)));
          }};
}

template <class Access>
Field flag(std::string key, Access acc) {
  return {key, false,
          [acc, key](ExperimentConfig& c, const std::string& v) { acc(c) = parse_bool(key, v); },
          [acc](const ExperimentConfig& c) {
            return std::string(acc(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          }};
}

#define TRACKRL_ACC(expr) [](ExperimentConfig& c) -> decltype(auto) { return (expr); }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"env", false,
                 [](ExperimentConfig& c, const std::string& v) {
                   try {
                     c.env = parse_env_kind(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("env", e.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.env)); }});
    f.push_back({"topology", false,
                 [](ExperimentConfig& c, const std::string& v) {
                   try {
                     c.topology = parse_topology(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("topology", e.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.topology)); }});
    f.push_back({"seeds", false,
                 [](ExperimentConfig& c, const std::string& v) {
                   c.seeds.clear();
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) {
                     const auto b = item.find_first_not_of(' ');
                     const auto e = item.find_last_not_of(' ');
                     if (b == std::string::npos) throw ConfigError("seeds", "empty seed in list");
                     c.seeds.push_back(parse_uint("seeds", item.substr(b, e - b + 1)));
                   }
                 },
                 [](const ExperimentConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.seeds.size(); ++i) {
                     if (i) s += ",";
                     s += std::to_string(c.seeds[i]);
                   }
                   return s;
                 }});
    f.push_back({"out_dir", false,
                 [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
                 [](const ExperimentConfig& c) { return c.out_dir; }});
    f.push_back(count("eval_episodes", TRACKRL_ACC(c.eval_episodes)));
    f.push_back(count("eval_interval", TRACKRL_ACC(c.eval_interval)));

    f.push_back(count("episodes", TRACKRL_ACC(c.training.episodes)));
    f.push_back(count("max_steps", TRACKRL_ACC(c.training.max_steps)));
    f.push_back(count("batch_size", TRACKRL_ACC(c.training.batch_size)));
    f.push_back(count("replay_capacity", TRACKRL_ACC(c.training.replay_capacity)));
    f.push_back(real("gamma", TRACKRL_ACC(c.training.gamma)));
    f.push_back(real("tau", TRACKRL_ACC(c.training.tau)));
    f.push_back(real("actor_lr", TRACKRL_ACC(c.training.actor_lr)));
    f.push_back(real("critic_lr", TRACKRL_ACC(c.training.critic_lr)));
    f.push_back(real("ou_theta", TRACKRL_ACC(c.training.ou.theta)));
    f.push_back(real("ou_mu", TRACKRL_ACC(c.training.ou.mu)));
    f.push_back(real("ou_sigma", TRACKRL_ACC(c.training.ou.sigma)));
    f.push_back(real("ou_dt", TRACKRL_ACC(c.training.ou.dt)));

    f.push_back(real("leaky_alpha", TRACKRL_ACC(c.leaky_alpha)));
    f.push_back(flag("actor_previous_action", TRACKRL_ACC(c.actor_previous_action)));
    f.push_back(count("toy_hidden", TRACKRL_ACC(c.toy_hidden)));

    f.push_back(real("theta_gx", TRACKRL_ACC(c.reward.theta_gx)));
    f.push_back(real("theta_gy", TRACKRL_ACC(c.reward.theta_gy)));
    f.push_back(real("theta_gz", TRACKRL_ACC(c.reward.theta_gz)));
    f.push_back(real("theta_ax", TRACKRL_ACC(c.reward.theta_ax)));
    f.push_back(real("theta_ay", TRACKRL_ACC(c.reward.theta_ay)));
    f.push_back(real("c_mov", TRACKRL_ACC(c.reward.c_mov)));
    f.push_back(real("c_stuck", TRACKRL_ACC(c.reward.c_stuck)));
    f.push_back(real("flip_penalty", TRACKRL_ACC(c.reward.flip_penalty)));
    f.push_back(real("goal_bonus", TRACKRL_ACC(c.reward.goal_bonus)));
    f.push_back(flag("abs_accel", TRACKRL_ACC(c.reward.abs_accel)));

    f.push_back(real("rise", TRACKRL_ACC(c.sim.stairs.rise), true));
    f.push_back(real("run", TRACKRL_ACC(c.sim.stairs.run), true));
    f.push_back(count("steps", TRACKRL_ACC(c.sim.stairs.steps), true));
    f.push_back(real("approach", TRACKRL_ACC(c.sim.stairs.approach), true));
    f.push_back(real("landing", TRACKRL_ACC(c.sim.stairs.landing), true));
    f.push_back(real("goal_distance", TRACKRL_ACC(c.sim.stairs.goal_distance), true));
    f.push_back(real("body_length", TRACKRL_ACC(c.sim.robot.body_length), true));
    f.push_back(real("track_height", TRACKRL_ACC(c.sim.robot.track_height), true));
    f.push_back(real("flipper_length", TRACKRL_ACC(c.sim.robot.flipper_length), true));
    f.push_back(real("flipper_radius", TRACKRL_ACC(c.sim.robot.flipper_radius), true));
    f.push_back(real("track_speed", TRACKRL_ACC(c.sim.robot.track_speed), true));
    f.push_back(real("flipper_rate", TRACKRL_ACC(c.sim.robot.flipper_rate_deg), true));
    f.push_back(real("max_climb", TRACKRL_ACC(c.sim.robot.max_climb_deg), true));
    f.push_back(real("camera_fov", TRACKRL_ACC(c.sim.camera.fov_deg), true));
    f.push_back(real("camera_near", TRACKRL_ACC(c.sim.camera.near), true));
    f.push_back(real("camera_far", TRACKRL_ACC(c.sim.camera.far), true));
    f.push_back(real("camera_mount_x", TRACKRL_ACC(c.sim.camera.mount_x), true));
    f.push_back(real("camera_mount_z", TRACKRL_ACC(c.sim.camera.mount_z), true));
    f.push_back(real("camera_tilt", TRACKRL_ACC(c.sim.camera.tilt_deg), true));
    f.push_back(real("imu_sigma_gyro", TRACKRL_ACC(c.sim.imu.sigma_gyro), true));
    f.push_back(real("imu_sigma_accel", TRACKRL_ACC(c.sim.imu.sigma_accel), true));
    f.push_back(real("flip_threshold", TRACKRL_ACC(c.sim.flip_threshold_deg), true));
    f.push_back(real("substep", TRACKRL_ACC(c.sim.substep), true));

    f.push_back(count("toy_horizon", TRACKRL_ACC(c.toy.horizon)));
    f.push_back(real("toy_start", TRACKRL_ACC(c.toy.start)));
    f.push_back(flag("toy_random_start", TRACKRL_ACC(c.toy.random_start)));
    return f;
  }();
  return table;
}

#undef TRACKRL_ACC

inline const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  if (c.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  if (c.eval_episodes == 0) throw ConfigError("eval_episodes", "must be >= 1");
  if (!(c.leaky_alpha > 0.0)) throw ConfigError("leaky_alpha", "must be > 0");
  if (c.toy_hidden == 0) throw ConfigError("toy_hidden", "must be >= 1");
  if (c.toy.horizon == 0) throw ConfigError("toy_horizon", "must be >= 1");
  try {
    validate(c.training);
    validate(c.reward);
    sim::validate(c.sim);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(colon == std::string::npos ? "" : msg.substr(0, colon),
                      colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
}

// Applies key/value pairs on top of `cfg`. Scenario files only accept
// scenario keys.
inline void apply(ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv,
                  const std::filesystem::path& base_dir, bool scenario_only = false);

inline void apply_scenario_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario", "cannot open scenario file " + path.string());
  apply(cfg, parse_key_values(in, path.string()), path.parent_path(), true);
}

inline void apply(ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv,
                  const std::filesystem::path& base_dir, bool scenario_only) {
  for (const auto& [key, value] : kv) {
    if (key == "scenario" && !scenario_only) {
      std::filesystem::path p(value);
      if (p.is_relative()) p = base_dir / p;
      apply_scenario_file(cfg, p);
      continue;
    }
    const auto* field = detail::find_field(key);
    if (field == nullptr || (scenario_only && !field->scenario)) {
      throw ConfigError(key, scenario_only ? "unknown scenario key" : "unknown key");
    }
    field->set(cfg, value);
  }
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>",
                                     const std::filesystem::path& base_dir = ".") {
  ExperimentConfig cfg;
  apply(cfg, parse_key_values(in, origin), base_dir);
  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  return parse_config(in, path.string(), path.parent_path());
}

// Every key with its resolved value; parse_config(print_config(c)) == c.
inline std::string print_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& f : detail::fields()) out += f.key + " = " + f.get(c) + "\n";
  return out;
}

inline StairsEnvConfig stairs_env_config(const ExperimentConfig& c) {
  return {c.sim, c.reward, camera_layout(c.topology), c.actor_previous_action};
}

inline NetworkOptions network_options(const ExperimentConfig& c) {
  NetworkOptions o;
  o.topology = c.topology;
  o.leaky_alpha = c.leaky_alpha;
  o.actor_previous_action = c.actor_previous_action;
  return o;
}

}  // namespace trackrl

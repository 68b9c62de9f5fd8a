#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "trackrl/network.hpp"
#include "trackrl/observation.hpp"

namespace trackrl {

enum class Topology { conv2d, conv3d };

inline const char* to_string(Topology t) { return t == Topology::conv2d ? "conv2d" : "conv3d"; }

inline Topology parse_topology(const std::string& s) {
  if (s == "conv2d") return Topology::conv2d;
  if (s == "conv3d") return Topology::conv3d;
  throw std::invalid_argument("topology must be conv2d or conv3d, got '" + s + "'");
}

inline CameraLayout camera_layout(Topology t) {
  return t == Topology::conv2d ? CameraLayout::channels : CameraLayout::volume;
}

struct NetworkOptions {
  Topology topology = Topology::conv2d;
  double leaky_alpha = 0.01;
  bool actor_previous_action = false;
  std::size_t imu_units = 32;
  std::size_t action_units = 32;
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 64;
};

// Two linear conv layers. conv2d treats the 4 frames as channels; conv3d
// keeps time as an axis until the flatten at the merge.
inline BranchSpec camera_branch(const std::string& name, Topology topology) {
  const auto linear = ActivationSpec::linear();
  BranchSpec b;
  b.name = name;
  if (topology == Topology::conv2d) {
    b.input_shape = {kStackDepth, sim::kDepthRows, sim::kDepthCols};
    b.layers = {LayerSpec::conv2d(8, 5, 5, 2, linear), LayerSpec::conv2d(16, 3, 3, 2, linear)};
  } else {
    b.input_shape = {1, kStackDepth, sim::kDepthRows, sim::kDepthCols};
    b.layers = {LayerSpec::conv3d(8, {2, 5, 5}, {1, 2, 2}, linear),
                LayerSpec::conv3d(16, {2, 3, 3}, {1, 2, 2}, linear)};
  }
  return b;
}

inline std::vector<LayerSpec> trunk(const NetworkOptions& o, std::size_t outputs,
                                    ActivationSpec head) {
  const auto leaky = ActivationSpec::leaky(o.leaky_alpha);
  return {LayerSpec::dense(o.hidden1, leaky), LayerSpec::dense(o.hidden2, leaky),
          LayerSpec::dense(outputs, head)};
}

inline NetworkSpec stairs_actor_spec(const NetworkOptions& o) {
  const auto leaky = ActivationSpec::leaky(o.leaky_alpha);
  NetworkSpec s;
  s.branches.push_back(camera_branch("front_camera", o.topology));
  s.branches.push_back(camera_branch("back_camera", o.topology));
  const std::size_t imu_in = o.actor_previous_action ? 8 : 6;
  s.branches.push_back({"imu", {imu_in}, {LayerSpec::dense(o.imu_units, leaky)}});
  s.trunk = trunk(o, 2, ActivationSpec::tanh());
  return s;
}

inline NetworkSpec stairs_critic_spec(const NetworkOptions& o) {
  const auto leaky = ActivationSpec::leaky(o.leaky_alpha);
  NetworkSpec s;
  s.branches.push_back(camera_branch("front_camera", o.topology));
  s.branches.push_back(camera_branch("back_camera", o.topology));
  s.branches.push_back({"imu", {6}, {LayerSpec::dense(o.imu_units, leaky)}});
  s.branches.push_back({"action", {2}, {LayerSpec::dense(o.action_units, leaky)}});
  s.trunk = trunk(o, 1, ActivationSpec::linear());
  return s;
}

// Dense-only nets for the scalar validation task.
inline NetworkSpec toy_actor_spec(std::size_t hidden = 64, double alpha = 0.01) {
  NetworkOptions o;
  o.hidden1 = o.hidden2 = hidden;
  o.leaky_alpha = alpha;
  NetworkSpec s;
  s.branches.push_back({"x", {1}, {}});
  s.trunk = trunk(o, 1, ActivationSpec::tanh());
  return s;
}

inline NetworkSpec toy_critic_spec(std::size_t hidden = 64, double alpha = 0.01) {
  NetworkOptions o;
  o.hidden1 = o.hidden2 = hidden;
  o.leaky_alpha = alpha;
  NetworkSpec s;
  s.branches.push_back({"x", {1}, {}});
  s.branches.push_back({"action", {1}, {}});
  s.trunk = trunk(o, 1, ActivationSpec::linear());
  return s;
}

}  // namespace trackrl

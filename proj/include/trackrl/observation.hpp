#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trackrl/sim/stairs.hpp"
#include "trackrl/tensor.hpp"

namespace trackrl {

constexpr std::size_t kStackDepth = 4;
constexpr double kFrameInterval = 0.25;  // s

// How camera stacks are laid out for the network: time as channels
// ([4, 34, 34]) or as a separate axis with one channel ([1, 4, 34, 34]).
enum class CameraLayout { channels, volume };

// Depth image normalised to [0, 1] by (d - near) / (far - near).
using NormalizedFrame = std::vector<double>;

// The agent-facing state: two 4-frame depth stacks ordered oldest to newest
// and the mean of the 4 IMU samples taken at the frame instants
// (g_x, g_y, g_z, a_x, a_y, a_z). Frames are shared between consecutive
// states.
struct StackedState {
  std::array<std::shared_ptr<const NormalizedFrame>, kStackDepth> front;
  std::array<std::shared_ptr<const NormalizedFrame>, kStackDepth> back;
  std::array<double, 6> imu{};
  std::optional<std::array<double, 2>> previous_action;  // appended to the IMU branch when set
  CameraLayout layout = CameraLayout::channels;

  Tensor camera(sim::CameraSide side) const {
    const auto& frames = side == sim::CameraSide::front ? front : back;
    std::vector<double> data;
    data.reserve(kStackDepth * sim::kDepthRows * sim::kDepthCols);
    for (const auto& f : frames) data.insert(data.end(), f->begin(), f->end());
    Shape shape{kStackDepth, sim::kDepthRows, sim::kDepthCols};
    if (layout == CameraLayout::volume) shape.insert(shape.begin(), 1);
    return Tensor(std::move(shape), std::move(data));
  }

  Tensor imu_tensor(bool with_previous_action) const {
    std::vector<double> v(imu.begin(), imu.end());
    if (with_previous_action && previous_action) {
      v.insert(v.end(), previous_action->begin(), previous_action->end());
    }
    return Tensor::rank1(std::move(v));
  }

  std::vector<Tensor> actor_inputs() const {
    return {camera(sim::CameraSide::front), camera(sim::CameraSide::back), imu_tensor(true)};
  }
  std::vector<Tensor> critic_inputs() const {
    return {camera(sim::CameraSide::front), camera(sim::CameraSide::back), imu_tensor(false)};
  }
};

inline std::array<double, 6> flatten(const sim::ImuSample& s) {
  return {s.gyro[0], s.gyro[1], s.gyro[2], s.accel[0], s.accel[1], s.accel[2]};
}

// The last four (front, back, IMU) observations taken 0.25 s apart.
class FrameHistory {
 public:
  FrameHistory(double near, double far) : near_(near), far_(far) {
    if (!(far > near)) throw std::invalid_argument("frame history needs far > near");
  }

  std::size_t size() const { return entries_.size(); }
  bool full() const { return entries_.size() == kStackDepth; }
  void clear() { entries_.clear(); }
  double last_time() const {
    if (entries_.empty()) throw std::logic_error("frame history is empty");
    return entries_.back().time;
  }

  void push_frame(const sim::DepthFrame& front, const sim::DepthFrame& back,
                  const sim::ImuSample& imu, double t) {
    if (!entries_.empty()) {
      const double gap = t - entries_.back().time;
      if (std::abs(gap - kFrameInterval) > 1e-9) {
        throw std::invalid_argument("frame at t=" + std::to_string(t) +
                                    " is not 0.25 s after the previous frame at t=" +
                                    std::to_string(entries_.back().time));
      }
    }
    if (entries_.size() == kStackDepth) entries_.pop_front();
    entries_.push_back({normalize(front), normalize(back), imu, t});
  }

  // Fills all four slots with the first observation of an episode.
  void bootstrap(const sim::DepthFrame& front, const sim::DepthFrame& back,
                 const sim::ImuSample& imu, double t) {
    if (!entries_.empty()) throw std::logic_error("bootstrap on a non-empty frame history");
    auto f = normalize(front);
    auto b = normalize(back);
    for (std::size_t i = 0; i < kStackDepth; ++i) {
      const double ti = t - static_cast<double>(kStackDepth - 1 - i) * kFrameInterval;
      entries_.push_back({f, b, imu, ti});
    }
  }

  StackedState build_state() const {
    if (!full()) {
      throw std::logic_error("build_state needs 4 frames, history holds " +
                             std::to_string(entries_.size()));
    }
    StackedState s;
    s.imu.fill(0.0);
    for (std::size_t i = 0; i < kStackDepth; ++i) {
      s.front[i] = entries_[i].front;
      s.back[i] = entries_[i].back;
      const auto v = flatten(entries_[i].imu);
      for (std::size_t k = 0; k < 6; ++k) s.imu[k] += v[k];
    }
    for (double& v : s.imu) v /= static_cast<double>(kStackDepth);
    return s;
  }

 private:
  struct Entry {
    std::shared_ptr<const NormalizedFrame> front;
    std::shared_ptr<const NormalizedFrame> back;
    sim::ImuSample imu;
    double time;
  };

  std::shared_ptr<const NormalizedFrame> normalize(const sim::DepthFrame& frame) const {
    auto out = std::make_shared<NormalizedFrame>(frame.depth.size());
    const double span = far_ - near_;
    for (std::size_t i = 0; i < frame.depth.size(); ++i) {
      (*out)[i] = (frame.depth[i] - near_) / span;
    }
    return out;
  }

  double near_;
  double far_;
  std::deque<Entry> entries_;
};

}  // namespace trackrl

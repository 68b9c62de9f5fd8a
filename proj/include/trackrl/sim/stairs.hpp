#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trackrl/sim/geometry.hpp"
#include "trackrl/sim/scenario.hpp"

namespace trackrl::sim {

constexpr std::size_t kDepthRows = 34;
constexpr std::size_t kDepthCols = 34;
constexpr double kGravity = 9.81;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Row-major 34x34 depth image in metres. Row 0 is the top of the image.
struct DepthFrame {
  std::vector<double> depth = std::vector<double>(kDepthRows * kDepthCols, 0.0);

  double at(std::size_t row, std::size_t col) const { return depth[row * kDepthCols + col]; }
  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;
};

// gyro in rad/s, accel in g. Body axes: x forward, y lateral, z up.
struct ImuSample {
  std::array<double, 3> gyro{0.0, 0.0, 0.0};
  std::array<double, 3> accel{0.0, 0.0, 1.0};
  friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

enum class CameraSide { front, back };

// Sagittal-plane pose of the platform. (x, z) is the centre of the track
// axis, pitch is positive nose-up. Angles in radians.
struct RobotState {
  double x = 0.0;
  double z = 0.0;
  double pitch = 0.0;
  double vx = 0.0;
  double vz = 0.0;
  double pitch_rate = 0.0;
  double ax = 0.0;  // world-frame linear acceleration, m/s^2
  double az = 0.0;
  double front_flipper = 0.0;
  double rear_flipper = 0.0;
  double front_flipper_rate = 0.0;
  double rear_flipper_rate = 0.0;
  double distance = 0.0;  // cumulative forward progress d_t
  double progress = 0.0;  // delta_t of the last step, >= 0
  bool flipped = false;
  bool goal = false;
  bool stuck = false;

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

// Deterministic quasi-static stair-climbing model. The robot is three
// capsules (track body, front and rear flipper pairs) resting on a polyline
// terrain. Each physics substep slews the flippers, drives forward along the
// body axis if the leading contact is not steeper than the climb limit, and
// then lets the body pitch settle to the nearest minimum of its
// centre height.
class StairsSim {
 public:
  explicit StairsSim(SimConfig config) : config_(config) {
    validate(config_);
    build_terrain();
  }

  const SimConfig& config() const { return config_; }
  const std::vector<Segment>& terrain() const { return terrain_; }

  RobotState reset(std::uint64_t seed) {
    noise_rng_.seed(seed);
    const auto& r = config_.robot;
    RobotState s;
    s.x = -config_.stairs.approach - (r.half_axis() + r.flipper_length + r.flipper_radius);
    s.pitch = settle(s.x, 0.0, 0.0, 0.0);
    s.z = support_height(s.x, s.pitch, 0.0, 0.0);
    return s;
  }

  // Advances by dt seconds. action = (front, rear) in [-1, 1]; the flipper
  // setpoints are action * 90 deg. throttle scales track speed (0 stops).
  RobotState step(const RobotState& state, std::span<const double> action, double dt,
                  double throttle = 1.0) const {
    if (action.size() != 2) {
      throw std::invalid_argument("stairs action must have 2 components, got " +
                                  std::to_string(action.size()));
    }
    for (double a : action) {
      if (!(a >= -1.0 && a <= 1.0)) {
        throw std::invalid_argument("action component " + std::to_string(a) +
                                    " outside [-1, 1]");
      }
    }
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(throttle >= 0.0 && throttle <= 1.0)) {
      throw std::invalid_argument("throttle must lie in [0, 1]");
    }
    const auto& r = config_.robot;
    const double half_pi = std::numbers::pi / 2.0;
    const double front_sp = action[0] * half_pi;
    const double rear_sp = action[1] * half_pi;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(dt / config_.substep - 1e-9)));
    const double h = dt / static_cast<double>(n);
    const double max_slew = deg2rad(r.flipper_rate_deg) * h;
    const double climb = std::tan(deg2rad(r.max_climb_deg));
    const double flipper_reach = r.flipper_length + r.flipper_radius;

    RobotState s = state;
    double x = s.x, pitch = s.pitch, ff = s.front_flipper, rf = s.rear_flipper;
    bool flipped = check_flip(s);
    for (std::size_t i = 0; i < n && !flipped; ++i) {
      double z = support_height(x, pitch, ff, rf);
      // A flipper stalls if turning it would lift the body more than its tip
      // can push.
      auto slew = [&](double& angle, double setpoint, bool front) {
        const double delta = std::clamp(setpoint - angle, -max_slew, max_slew);
        if (delta == 0.0) return;
        const double cand = std::abs(setpoint - angle) <= max_slew ? setpoint : angle + delta;
        const double lifted = front ? support_height(x, pitch, cand, rf)
                                    : support_height(x, pitch, ff, cand);
        if (lifted - z <= flipper_reach * std::abs(delta) + 1e-9) {
          angle = cand;
          z = lifted;
        }
      };
      slew(ff, front_sp, true);
      slew(rf, rear_sp, false);

      const double advance = throttle * r.track_speed * h * std::cos(pitch);
      if (advance > 0.0) {
        double dx = advance;
        for (int k = 0; k < 5; ++k, dx *= 0.5) {
          if (support_height(x + dx, pitch, ff, rf) - z <= dx * climb + 1e-12) {
            x += dx;
            break;
          }
        }
      }
      pitch = settle(x, pitch, ff, rf, &flipped);
    }
    s.z = support_height(x, pitch, ff, rf);
    s.vx = (x - state.x) / dt;
    s.vz = (s.z - state.z) / dt;
    s.pitch_rate = (pitch - state.pitch) / dt;
    s.ax = (s.vx - state.vx) / dt;
    s.az = (s.vz - state.vz) / dt;
    s.front_flipper_rate = (ff - state.front_flipper) / dt;
    s.rear_flipper_rate = (rf - state.rear_flipper) / dt;
    s.x = x;
    s.pitch = pitch;
    s.front_flipper = ff;
    s.rear_flipper = rf;
    s.progress = std::max(0.0, x - state.x);
    s.distance = state.distance + s.progress;
    s.stuck = throttle > 0.0 && s.progress == 0.0;
    s.flipped = check_flip(s);
    s.goal = check_goal(s);
    return s;
  }

  bool check_flip(const RobotState& s) const {
    return std::abs(s.pitch) > deg2rad(config_.flip_threshold_deg);
  }

  // Past the goal line with the whole track over the landing, resting on it
  // and upright.
  bool check_goal(const RobotState& s) const {
    if (check_flip(s) || s.x < config_.stairs.goal_x()) return false;
    const double rear_end = s.x - config_.robot.half_axis() * std::cos(s.pitch);
    if (rear_end < config_.stairs.top_edge_x()) return false;
    const double rest = support_height(s.x, s.pitch, s.front_flipper, s.rear_flipper);
    return std::abs(s.z - rest) <= 1e-6;
  }

  DepthFrame render_depth(const RobotState& s, CameraSide side) const {
    const auto& cam = config_.camera;
    const bool front = side == CameraSide::front;
    const Vec2 mount{front ? cam.mount_x : -cam.mount_x, cam.mount_z};
    const Vec2 origin = Vec2{s.x, s.z} + rotate(mount, s.pitch);
    const double tilt = deg2rad(cam.tilt_deg);
    const double axis = front ? s.pitch - tilt : s.pitch + std::numbers::pi + tilt;
    const double fov = deg2rad(cam.fov_deg);
    DepthFrame frame;
    for (std::size_t row = 0; row < kDepthRows; ++row) {
      const double offset =
          fov / 2.0 - (static_cast<double>(row) + 0.5) * fov / static_cast<double>(kDepthRows);
      const double angle = front ? axis + offset : axis - offset;
      const Vec2 dir{std::cos(angle), std::sin(angle)};
      double depth = cam.far;
      if (auto t = ray_cast(origin, dir, terrain_)) {
        depth = std::clamp(*t * std::cos(offset), cam.near, cam.far);
      }
      std::fill_n(frame.depth.begin() + static_cast<std::ptrdiff_t>(row * kDepthCols), kDepthCols,
                  depth);
    }
    return frame;
  }

  // Noise-free reading: body rates and the specific force in body axes.
  ImuSample true_imu(const RobotState& s) const {
    ImuSample out;
    out.gyro = {0.0, s.pitch_rate, 0.0};
    const double fx = s.ax;
    const double fz = s.az + kGravity;
    const double c = std::cos(s.pitch);
    const double sn = std::sin(s.pitch);
    out.accel = {(fx * c + fz * sn) / kGravity, 0.0, (-fx * sn + fz * c) / kGravity};
    return out;
  }

  template <class Rng>
  ImuSample read_imu(const RobotState& s, Rng& rng) const {
    ImuSample out = true_imu(s);
    std::normal_distribution<double> gyro_noise(0.0, config_.imu.sigma_gyro);
    std::normal_distribution<double> accel_noise(0.0, config_.imu.sigma_accel);
    for (double& g : out.gyro) {
      if (config_.imu.sigma_gyro > 0.0) g += gyro_noise(rng);
    }
    for (double& a : out.accel) {
      if (config_.imu.sigma_accel > 0.0) a += accel_noise(rng);
    }
    return out;
  }

  // Uses the generator seeded by reset().
  ImuSample read_imu(const RobotState& s) { return read_imu(s, noise_rng_); }

  // World-frame capsules for a pose with the track axis centre at (x, 0).
  std::array<Capsule, 3> capsules(double x, double pitch, double front_flipper,
                                  double rear_flipper) const {
    const auto& r = config_.robot;
    const double a = r.half_axis();
    const double l = r.flipper_length;
    auto world = [&](Vec2 p) { return Vec2{x, 0.0} + rotate(p, pitch); };
    const Vec2 fp{a, 0.0};
    const Vec2 rp{-a, 0.0};
    return {Capsule{world(rp), world(fp), r.track_radius()},
            Capsule{world(fp),
                    world(fp + Vec2{l * std::cos(front_flipper), l * std::sin(front_flipper)}),
                    r.flipper_radius},
            Capsule{world(rp),
                    world(rp + Vec2{-l * std::cos(rear_flipper), l * std::sin(rear_flipper)}),
                    r.flipper_radius}};
  }

  // Lowest track-axis height at which the robot clears the terrain.
  double support_height(double x, double pitch, double front_flipper,
                        double rear_flipper) const {
    double z = kNoConstraint;
    for (const auto& c : capsules(x, pitch, front_flipper, rear_flipper)) {
      const double lo = std::min(c.a.x, c.b.x) - c.radius;
      const double hi = std::max(c.a.x, c.b.x) + c.radius;
      for (const auto& seg : terrain_) {
        if (std::max(seg.a.x, seg.b.x) < lo || std::min(seg.a.x, seg.b.x) > hi) continue;
        z = std::max(z, lift_to_clear(c, seg));
      }
    }
    return z;
  }

  // Local descent of the centre height over pitch, starting at `pitch`.
  double settle(double x, double pitch, double front_flipper, double rear_flipper,
                bool* flipped = nullptr) const {
    const double limit = deg2rad(config_.flip_threshold_deg);
    auto height = [&](double p) { return support_height(x, p, front_flipper, rear_flipper); };
    double best = height(pitch);
    double h = deg2rad(1.0);
    for (int iter = 0; iter < 4000 && h > 1e-7; ++iter) {
      const double up = height(pitch + h);
      const double down = height(pitch - h);
      if (up < best && up <= down) {
        pitch += h;
        best = up;
      } else if (down < best) {
        pitch -= h;
        best = down;
      } else {
        h *= 0.5;
      }
      if (std::abs(pitch) > limit) {
        if (flipped) *flipped = true;
        break;
      }
    }
    return pitch;
  }

 private:
  void build_terrain() {
    const auto& st = config_.stairs;
    std::vector<Vec2> pts;
    pts.push_back({-50.0, 0.0});
    for (int k = 0; k < st.steps; ++k) {
      const double xk = k * st.run;
      pts.push_back({xk, k * st.rise});
      pts.push_back({xk, (k + 1) * st.rise});
    }
    const double end = st.top_edge_x() + st.landing;
    pts.push_back({end, st.top_height()});
    pts.push_back({end, st.top_height() + 2.0});
    terrain_.clear();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) terrain_.push_back({pts[i], pts[i + 1]});
  }

  SimConfig config_;
  std::vector<Segment> terrain_;
  std::mt19937_64 noise_rng_{0};
};

}  // namespace trackrl::sim

#pragma once

#include <stdexcept>
#include <string>

namespace trackrl::sim {

// Stair flight: flat approach, `steps` risers, then a top landing closed by
// a wall. The first riser stands at x = 0.
struct StairScenario {
  double rise = 0.17;           // m
  double run = 0.28;            // m
  int steps = 8;
  double approach = 0.5;        // gap between robot front and first riser at reset, m
  double landing = 1.5;         // top landing length, m
  double goal_distance = 0.6;   // goal x beyond the top edge, m

  double top_edge_x() const { return (steps - 1) * run; }
  double top_height() const { return steps * rise; }
  double goal_x() const { return top_edge_x() + goal_distance; }
};

struct RobotGeometry {
  double body_length = 0.8;      // track length, m
  double track_height = 0.1;     // m; track ends are half-circles of this diameter
  double flipper_length = 0.3;   // pivot to tip, m
  double flipper_radius = 0.04;  // m
  double track_speed = 0.15;     // m/s along the body axis
  double flipper_rate_deg = 60;  // max flipper slew, deg/s
  double max_climb_deg = 75;     // steepest contact the tracks can drive up

  double track_radius() const { return track_height / 2.0; }
  double half_axis() const { return body_length / 2.0 - track_radius(); }
};

struct CameraConfig {
  double fov_deg = 43.0;  // vertical
  double near = 0.5;      // m
  double far = 4.5;       // m
  double mount_x = 0.3;   // distance forward (front) or back (rear) of body centre
  double mount_z = 0.35;  // height above the track axis
  double tilt_deg = 30.0; // optical axis pitched down
};

struct ImuConfig {
  double sigma_gyro = 0.02;   // rad/s
  double sigma_accel = 0.02;  // g
};

struct SimConfig {
  StairScenario stairs;
  RobotGeometry robot;
  CameraConfig camera;
  ImuConfig imu;
  double flip_threshold_deg = 90.0;
  double substep = 0.05;  // s, physics resolution inside one control step
};

inline void validate(const SimConfig& c) {
  auto require = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw std::invalid_argument(key + ": " + what);
  };
  const auto& s = c.stairs;
  require(s.rise > 0.0, "rise", "must be > 0");
  require(s.run > 0.0, "run", "must be > 0");
  require(s.steps >= 1, "steps", "must be >= 1");
  require(s.approach >= 0.0, "approach", "must be >= 0");
  require(s.landing > 0.0, "landing", "must be > 0");
  require(s.goal_distance > 0.0 && s.goal_distance <= s.landing, "goal_distance",
          "goal must lie beyond the top edge and on the landing");
  const auto& r = c.robot;
  require(r.body_length > r.track_height && r.track_height > 0.0, "body_length",
          "body must be longer than the track height");
  require(r.flipper_length >= 0.0, "flipper_length", "must be >= 0");
  require(r.flipper_radius > 0.0 && r.flipper_radius <= r.track_radius(), "flipper_radius",
          "must be in (0, track_height/2]");
  require(r.track_speed >= 0.0, "track_speed", "must be >= 0");
  require(r.flipper_rate_deg > 0.0, "flipper_rate", "must be > 0");
  require(r.max_climb_deg > 0.0 && r.max_climb_deg < 90.0, "max_climb", "must be in (0, 90)");
  const auto& cam = c.camera;
  require(cam.fov_deg > 0.0 && cam.fov_deg < 180.0, "camera_fov", "must be in (0, 180)");
  require(cam.near > 0.0 && cam.far > cam.near, "camera_far", "need 0 < near < far");
  require(c.imu.sigma_gyro >= 0.0, "imu_sigma_gyro", "must be >= 0");
  require(c.imu.sigma_accel >= 0.0, "imu_sigma_accel", "must be >= 0");
  require(c.flip_threshold_deg > 0.0 && c.flip_threshold_deg <= 180.0, "flip_threshold",
          "must be in (0, 180]");
  require(c.substep > 0.0, "substep", "must be > 0");
}

}  // namespace trackrl::sim

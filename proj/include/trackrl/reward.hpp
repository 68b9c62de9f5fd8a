#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace trackrl {

struct RewardParams {
  double theta_gx = 1.0;
  double theta_gy = 1.0;
  double theta_gz = 1.0;
  double theta_ax = 5.0;
  double theta_ay = 5.0;
  double c_mov = 10.0;   // per metre of forward progress
  double c_stuck = 5.0;
  double flip_penalty = -1000.0;
  double goal_bonus = 100.0;
  bool abs_accel = false;  // use |a_x|, |a_y| instead of the signed values
};

inline void validate(const RewardParams& p) {
  const double scales[] = {p.theta_gx, p.theta_gy, p.theta_gz, p.theta_ax, p.theta_ay, p.c_stuck};
  for (double s : scales) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("reward scale parameters must be finite and >= 0");
    }
  }
  if (!(p.c_mov > 0.0) || !std::isfinite(p.c_mov)) throw std::invalid_argument("c_mov must be > 0");
}

// w = (g_x, g_y, g_z, a_x, a_y, a_z). Gyro terms are squared, accelerometer
// terms enter linearly; a_z is unused.
inline double imu_penalty(const std::array<double, 6>& w, const RewardParams& p) {
  const double ax = p.abs_accel ? std::abs(w[3]) : w[3];
  const double ay = p.abs_accel ? std::abs(w[4]) : w[4];
  return -p.theta_gx * w[0] * w[0] - p.theta_gy * w[1] * w[1] - p.theta_gz * w[2] * w[2] -
         p.theta_ax * ax - p.theta_ay * ay;
}

// Case order: goal, flip, forward progress, stuck. Terminal cases replace
// the IMU term.
inline double final_reward(const std::array<double, 6>& w, double progress, bool flipped,
                           bool goal, const RewardParams& p) {
  if (flipped && goal) throw std::invalid_argument("final_reward: flip and goal both set");
  if (!(progress >= 0.0)) throw std::invalid_argument("final_reward: progress must be >= 0");
  if (goal) return p.goal_bonus;
  if (flipped) return p.flip_penalty;
  if (progress > 0.0) return imu_penalty(w, p) + p.c_mov * progress;
  return imu_penalty(w, p) - p.c_stuck;
}

}  // namespace trackrl

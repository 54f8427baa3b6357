#include "convoy/comms.hpp"

#include <cmath>

namespace convoy {

RangeMeasurement measure_range(const Pose2& target_pose,
                               const Pose2& follower_pose,
                               const RangeSensorConfig& config, double now,
                               RandomStream& rng) {
  // Draw unconditionally to keep the stream aligned across validity changes.
  const double noise = rng.gaussian(config.noise_std);

  const double dx = target_pose.x - follower_pose.x;
  const double dy = target_pose.y - follower_pose.y;
  const double true_distance = std::hypot(dx, dy);
  const double bearing =
      wrap_angle(std::atan2(dy, dx) - follower_pose.theta);

  RangeMeasurement m;
  m.stamp = now;
  if (true_distance > config.max_range ||
      std::abs(bearing) > 0.5 * config.fov) {
    m.valid = false;
    return m;
  }
  m.valid = true;
  m.distance = true_distance + config.bias + noise;
  return m;
}

}  // namespace convoy

#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "convoy/geometry.hpp"
#include "convoy/random.hpp"
#include "convoy/vehicle.hpp"

namespace convoy {

/// Predicted state sequence shared from a leading robot to its follower.
struct RolloutMessage {
  int sender{0};
  double stamp{0.0};                // send time
  std::vector<Pose2> poses;        // K predicted poses
  std::vector<double> times;       // K timestamps, strictly increasing
  Pose2 fix_pose;                  // localization fix at send time
  double fix_stamp{0.0};
};

/// Localization fix plus the sender's actuation state; used by the PI-on-
/// localization follower and by the centralized solver's reverse link.
struct FixMessage {
  int sender{0};
  double stamp{0.0};
  Pose2 pose;
  ControlInput u_act;
  ControlInput u_prev;
};

/// First control input computed centrally for a follower.
struct InputMessage {
  double stamp{0.0};
  ControlInput u;
};

/// Delay / jitter / drop model of one directed link.
struct ChannelConfig {
  double base_delay{0.0};   // s
  double jitter_std{0.0};   // s, truncated at +-3 sigma
  double drop_prob{0.0};    // [0, 1]
};

/// Simulated directed channel. Messages are enqueued with a randomized
/// delivery time and handed out in delivery order (ties by send sequence).
template <typename Msg>
class Channel {
 public:
  Channel(const ChannelConfig& config, std::uint64_t seed,
          std::uint64_t stream_id)
      : config_(config), rng_(seed, stream_id) {}

  /// Enqueues msg for delivery at now + base_delay + jitter, or drops it
  /// with probability drop_prob. Jitter is truncated at +-3 sigma and the
  /// total delay never goes negative.
  void send(const Msg& msg, double now) {
    const double drop_draw = rng_.uniform();
    const double jitter = std::clamp(rng_.gaussian(config_.jitter_std),
                                     -3.0 * config_.jitter_std,
                                     3.0 * config_.jitter_std);
    if (drop_draw < config_.drop_prob) {
      ++dropped_;
      return;
    }
    const double delivery =
        std::max(0.0, config_.base_delay + jitter) + now;
    queue_.push(Entry{delivery, seq_++, msg});
  }

  /// Removes and returns all messages with delivery time <= now, ordered by
  /// delivery time (ties by send order).
  std::vector<Msg> poll(double now) {
    std::vector<Msg> out;
    while (!queue_.empty() && queue_.top().delivery <= now) {
      out.push_back(queue_.top().msg);
      queue_.pop();
    }
    return out;
  }

  std::uint64_t dropped_count() const { return dropped_; }

 private:
  struct Entry {
    double delivery;
    std::uint64_t seq;
    Msg msg;
    bool operator>(const Entry& other) const {
      if (delivery != other.delivery) return delivery > other.delivery;
      return seq > other.seq;
    }
  };

  ChannelConfig config_;
  RandomStream rng_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::uint64_t seq_{0};
  std::uint64_t dropped_{0};
};

/// One reading of the follower-mounted range sensor aimed at the leading
/// robot's retro-reflector.
struct RangeMeasurement {
  double distance{0.0};
  double stamp{0.0};
  bool valid{false};
};

/// Range sensor parameters.
struct RangeSensorConfig {
  double noise_std{0.0};   // m
  double bias{0.0};        // m
  double max_range{10.0};  // m
  double fov{M_PI};        // rad, full width centered on follower heading
};

/// Simulates the direct line-of-sight range measurement. The reading is
/// valid only when the target is within max_range and within +-fov/2 of the
/// follower's heading.
RangeMeasurement measure_range(const Pose2& target_pose,
                               const Pose2& follower_pose,
                               const RangeSensorConfig& config, double now,
                               RandomStream& rng);

}  // namespace convoy

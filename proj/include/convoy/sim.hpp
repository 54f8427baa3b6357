#pragma once

#include <string>

#include "convoy/config.hpp"
#include "convoy/metrics.hpp"
#include "convoy/path.hpp"
#include "convoy/random.hpp"

namespace convoy {

/// Localization fix: the true pose perturbed by per-axis Gaussian noise
/// (x, y in meters; theta uses the same sigma in radians) with a constant
/// body-frame bias offset applied.
Pose2 localize(const Pose2& true_pose, double noise_std, const Pose2& bias,
               RandomStream& rng);

struct RunResult {
  TrajectoryLog log;
  MetricsReport metrics;
  bool aborted{false};
  std::string abort_reason;
  double sim_duration_s{0.0};
  double wall_seconds{0.0};
};

/// Builds the teach path from the config and runs the closed loop; the seed
/// argument replaces the config's seed so sweeps can rerun one document.
/// (config, seed) fully determines every output.
RunResult run(const ConvoyConfig& config, std::uint64_t seed);

/// Teach path construction used by run(); exposed for tests and tools.
TeachPath build_path(const ConvoyConfig& config);

}  // namespace convoy

#pragma once

#include <cstdint>
#include <random>

namespace convoy {

/// Deterministic random stream with stable draw accounting: uniform() takes
/// one engine draw, gaussian() always takes two. Streams derived from the
/// same master seed with different ids are independent, so adding a consumer
/// never perturbs existing streams.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : engine_(derive(seed, stream_id)) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Zero-mean Gaussian via Box-Muller (no spare caching).
  double gaussian(double std_dev) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return std_dev * r * std::cos(2.0 * M_PI * u2);
  }

 private:
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream_id) {
    // splitmix64 over the (seed, id) pair.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace convoy

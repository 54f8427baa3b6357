#pragma once

#include <optional>
#include <vector>

#include "convoy/geometry.hpp"

namespace convoy {

/// Position of a query point relative to a teach path: arc length along the
/// path, signed lateral offset (positive to the left of the travel
/// direction), and heading error.
struct PathCoord {
  double s{0.0};
  double lateral{0.0};
  double heading_err{0.0};
};

/// Arc-length-parameterized pose polyline with a lateral safety corridor.
/// Built once from waypoints and immutable afterwards; all queries are
/// read-only and safe for concurrent use.
class TeachPath {
 public:
  struct Vertex {
    Pose2 pose;
    double s{0.0};
  };

  /// Resamples the waypoint polyline at <= 0.1 m spacing; positions are
  /// linearly interpolated and headings recomputed from segment tangents.
  /// Throws std::invalid_argument for < 2 waypoints or duplicate
  /// consecutive waypoints.
  static TeachPath build(const std::vector<Pose2>& waypoints,
                         double corridor_half_width, bool closed);

  bool closed() const { return closed_; }
  double corridor_half_width() const { return corridor_half_width_; }
  double length() const { return length_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  /// Pose at arc length s. Open paths require 0 <= s <= length (throws
  /// std::out_of_range otherwise); closed paths wrap s modulo length.
  Pose2 pose_at(double s) const;

  /// Global nearest-point projection onto the polyline. Ties between
  /// equidistant segments are broken toward the smallest s.
  PathCoord project(const Pose2& p) const;

  /// Projection restricted to segments within [s_hint - window,
  /// s_hint + window]; used where the caller can bound the answer.
  PathCoord project_near(const Pose2& p, double s_hint, double window) const;

  /// Largest s* < anchor.s whose position lies at chordal distance d behind
  /// the anchor, located by backward march plus bisection to |error| < 1e-4 m
  /// within the window [anchor.s - 4d, anchor.s]. Returns nullopt when no
  /// crossing exists in the window.
  std::optional<PathCoord> offset_behind_euclidean(const PathCoord& anchor,
                                                   double d) const;

  /// s* = anchor.s - d exactly. Throws std::out_of_range on open-path
  /// underflow, std::invalid_argument for d <= 0.
  PathCoord offset_behind_arclength(const PathCoord& anchor, double d) const;

  /// corridor_half_width - |lateral|; negative means the corridor is
  /// violated.
  double corridor_margin(const Pose2& p) const;

 private:
  TeachPath() = default;

  double wrap_s(double s) const;
  PathCoord project_range(const Pose2& p, std::size_t seg_begin,
                          std::size_t seg_end) const;
  std::size_t segment_count() const;
  // Segment i runs from vertex i to vertex i+1 (wrapping for closed paths).
  void segment_endpoints(std::size_t i, const Vertex** a,
                         const Vertex** b, double* seg_len) const;

  std::vector<Vertex> vertices_;
  bool closed_{false};
  double corridor_half_width_{0.0};
  double length_{0.0};
};

}  // namespace convoy

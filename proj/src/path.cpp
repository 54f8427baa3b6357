#include "convoy/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace convoy {

namespace {
constexpr double kResampleSpacing = 0.1;      // m
constexpr double kChordTolerance = 1e-4;      // m, euclidean offset bisection
constexpr double kDuplicateWaypoint = 1e-9;   // m
}  // namespace

TeachPath TeachPath::build(const std::vector<Pose2>& waypoints,
                           double corridor_half_width, bool closed) {
  if (waypoints.size() < 2) {
    throw std::invalid_argument("TeachPath: need at least 2 waypoints");
  }
  if (corridor_half_width <= 0.0) {
    throw std::invalid_argument("TeachPath: corridor_half_width must be > 0");
  }

  // Input segments, including the closing one for closed paths.
  const std::size_t n_wp = waypoints.size();
  const std::size_t n_seg = closed ? n_wp : n_wp - 1;

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n_seg; ++i) {
    const Pose2& a = waypoints[i];
    const Pose2& b = waypoints[(i + 1) % n_wp];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len < kDuplicateWaypoint) {
      throw std::invalid_argument(
          "TeachPath: duplicate consecutive waypoints");
    }
    const auto n_sub =
        static_cast<std::size_t>(std::ceil(len / kResampleSpacing));
    for (std::size_t j = 0; j < n_sub; ++j) {
      const double t = static_cast<double>(j) / static_cast<double>(n_sub);
      xs.push_back(a.x + t * (b.x - a.x));
      ys.push_back(a.y + t * (b.y - a.y));
    }
  }
  if (!closed) {
    xs.push_back(waypoints.back().x);
    ys.push_back(waypoints.back().y);
  }

  const std::size_t n = xs.size();
  TeachPath path;
  path.closed_ = closed;
  path.corridor_half_width_ = corridor_half_width;
  path.vertices_.resize(n);

  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      s += std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
    }
    path.vertices_[i].s = s;
  }
  path.length_ =
      closed ? s + std::hypot(xs[0] - xs[n - 1], ys[0] - ys[n - 1]) : s;

  // Headings from central differences of the resampled positions; forward /
  // backward differences at open ends.
  for (std::size_t i = 0; i < n; ++i) {
    double dx;
    double dy;
    if (closed) {
      const std::size_t prev = (i + n - 1) % n;
      const std::size_t next = (i + 1) % n;
      dx = xs[next] - xs[prev];
      dy = ys[next] - ys[prev];
    } else if (i == 0) {
      dx = xs[1] - xs[0];
      dy = ys[1] - ys[0];
    } else if (i == n - 1) {
      dx = xs[n - 1] - xs[n - 2];
      dy = ys[n - 1] - ys[n - 2];
    } else {
      dx = xs[i + 1] - xs[i - 1];
      dy = ys[i + 1] - ys[i - 1];
    }
    path.vertices_[i].pose = Pose2(xs[i], ys[i], std::atan2(dy, dx));
  }
  return path;
}

double TeachPath::wrap_s(double s) const {
  if (!closed_) return s;
  double wrapped = std::fmod(s, length_);
  if (wrapped < 0.0) wrapped += length_;
  return wrapped;
}

std::size_t TeachPath::segment_count() const {
  return closed_ ? vertices_.size() : vertices_.size() - 1;
}

void TeachPath::segment_endpoints(std::size_t i, const Vertex** a,
                                  const Vertex** b, double* seg_len) const {
  *a = &vertices_[i];
  if (closed_ && i == vertices_.size() - 1) {
    *b = &vertices_[0];
    *seg_len = length_ - vertices_[i].s;
  } else {
    *b = &vertices_[i + 1];
    *seg_len = vertices_[i + 1].s - vertices_[i].s;
  }
}

Pose2 TeachPath::pose_at(double s) const {
  if (closed_) {
    s = wrap_s(s);
  } else if (s < -1e-9 || s > length_ + 1e-9) {
    throw std::out_of_range("TeachPath::pose_at: s out of range");
  }
  s = std::clamp(s, 0.0, length_);

  // Find the bracketing segment by binary search on vertex arc lengths.
  const auto it = std::upper_bound(
      vertices_.begin(), vertices_.end(), s,
      [](double value, const Vertex& v) { return value < v.s; });
  std::size_t seg = (it == vertices_.begin())
                        ? 0
                        : static_cast<std::size_t>(it - vertices_.begin()) - 1;
  seg = std::min(seg, segment_count() - 1);

  const Vertex* a;
  const Vertex* b;
  double seg_len;
  segment_endpoints(seg, &a, &b, &seg_len);
  const double t = seg_len > 0.0 ? (s - a->s) / seg_len : 0.0;
  const double heading =
      a->pose.theta + t * wrap_angle(b->pose.theta - a->pose.theta);
  return Pose2(a->pose.x + t * (b->pose.x - a->pose.x),
               a->pose.y + t * (b->pose.y - a->pose.y), heading);
}

PathCoord TeachPath::project_range(const Pose2& p, std::size_t seg_begin,
                                   std::size_t seg_end) const {
  double best_dist2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  double best_px = 0.0;
  double best_py = 0.0;
  std::size_t best_seg = 0;

  const std::size_t n_seg = segment_count();
  for (std::size_t idx = seg_begin; idx < seg_end; ++idx) {
    const std::size_t i = closed_ ? idx % n_seg : idx;
    const Vertex* a;
    const Vertex* b;
    double seg_len;
    segment_endpoints(i, &a, &b, &seg_len);
    const double vx = b->pose.x - a->pose.x;
    const double vy = b->pose.y - a->pose.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
      t = std::clamp(
          ((p.x - a->pose.x) * vx + (p.y - a->pose.y) * vy) / len2, 0.0, 1.0);
    }
    const double px = a->pose.x + t * vx;
    const double py = a->pose.y + t * vy;
    const double dx = p.x - px;
    const double dy = p.y - py;
    const double dist2 = dx * dx + dy * dy;
    // Strict < keeps the earliest (smallest-s) segment on ties.
    if (dist2 < best_dist2 - 1e-15) {
      best_dist2 = dist2;
      best_s = a->s + t * seg_len;
      best_px = px;
      best_py = py;
      best_seg = i;
    }
  }

  const Vertex* a;
  const Vertex* b;
  double seg_len;
  segment_endpoints(best_seg, &a, &b, &seg_len);
  const double tx = (b->pose.x - a->pose.x) / seg_len;
  const double ty = (b->pose.y - a->pose.y) / seg_len;
  const double offx = p.x - best_px;
  const double offy = p.y - best_py;

  PathCoord coord;
  coord.s = wrap_s(best_s);
  const double cross = tx * offy - ty * offx;
  const double dist = std::sqrt(best_dist2);
  coord.lateral = cross >= 0.0 ? dist : -dist;
  coord.heading_err = wrap_angle(p.theta - pose_at(coord.s).theta);
  return coord;
}

PathCoord TeachPath::project(const Pose2& p) const {
  return project_range(p, 0, segment_count());
}

PathCoord TeachPath::project_near(const Pose2& p, double s_hint,
                                  double window) const {
  const std::size_t n_seg = segment_count();
  if (!closed_) {
    const double lo = std::clamp(s_hint - window, 0.0, length_);
    const double hi = std::clamp(s_hint + window, 0.0, length_);
    auto seg_of = [&](double s) {
      const auto it = std::upper_bound(
          vertices_.begin(), vertices_.end(), s,
          [](double value, const Vertex& v) { return value < v.s; });
      const std::size_t i =
          (it == vertices_.begin())
              ? 0
              : static_cast<std::size_t>(it - vertices_.begin()) - 1;
      return std::min(i, n_seg - 1);
    };
    return project_range(p, seg_of(lo), seg_of(hi) + 1);
  }
  if (2.0 * window >= length_) {
    return project(p);
  }
  const double lo = wrap_s(s_hint - window);
  const auto it = std::upper_bound(
      vertices_.begin(), vertices_.end(), lo,
      [](double value, const Vertex& v) { return value < v.s; });
  const std::size_t first =
      (it == vertices_.begin())
          ? 0
          : static_cast<std::size_t>(it - vertices_.begin()) - 1;
  const auto span = static_cast<std::size_t>(
      std::ceil(2.0 * window / kResampleSpacing)) + 2;
  return project_range(p, first, first + std::min(span, n_seg));
}

std::optional<PathCoord> TeachPath::offset_behind_euclidean(
    const PathCoord& anchor, double d) const {
  if (d <= 0.0) {
    throw std::invalid_argument("offset_behind_euclidean: d must be > 0");
  }
  const Pose2 anchor_pose = pose_at(anchor.s);
  auto chord = [&](double s) {
    const Pose2 q = pose_at(s);
    return std::hypot(q.x - anchor_pose.x, q.y - anchor_pose.y);
  };

  double window_lo = anchor.s - 4.0 * d;
  if (!closed_) {
    window_lo = std::max(window_lo, 0.0);
  }

  // March backward from the anchor to the first crossing of chord >= d,
  // which is the largest-s root, then bisect.
  const double step = std::min(0.05, d / 10.0);
  double hi = anchor.s;        // chord(hi) < d
  double hi_chord = 0.0;
  double lo = anchor.s;
  bool bracketed = false;
  while (lo > window_lo) {
    lo = std::max(lo - step, window_lo);
    const double c = chord(lo);
    if (c >= d) {
      bracketed = true;
      break;
    }
    hi = lo;
    hi_chord = c;
  }
  if (!bracketed) {
    return std::nullopt;
  }
  (void)hi_chord;

  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double c = chord(mid);
    if (std::abs(c - d) < kChordTolerance) {
      return PathCoord{wrap_s(mid), 0.0, 0.0};
    }
    if (c >= d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return PathCoord{wrap_s(0.5 * (lo + hi)), 0.0, 0.0};
}

PathCoord TeachPath::offset_behind_arclength(const PathCoord& anchor,
                                             double d) const {
  if (d <= 0.0) {
    throw std::invalid_argument("offset_behind_arclength: d must be > 0");
  }
  const double s = anchor.s - d;
  if (!closed_ && s < 0.0) {
    throw std::out_of_range("offset_behind_arclength: underflow on open path");
  }
  return PathCoord{wrap_s(s), 0.0, 0.0};
}

double TeachPath::corridor_margin(const Pose2& p) const {
  return corridor_half_width_ - std::abs(project(p).lateral);
}

}  // namespace convoy

// Copyright 2026 The crossrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Host-vehicle rectangle, its four oriented sides and chord crossing
// detection.
//
// Host frame: x forward (front line at x_front), y to the right, so the
// front side spans y in [y_left, y_right].

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "crossrate/errors.hpp"
#include "crossrate/gaussian.hpp"

namespace crossrate {

struct HostRectangle {
  double x_front = 0.0;   // m
  double x_rear = -5.0;   // m
  double y_left = -1.0;   // m
  double y_right = 1.0;   // m

  void validate() const {
    if (!(x_rear < x_front) || !(y_left < y_right)) {
      throw ArgumentError("HostRectangle: degenerate rectangle");
    }
  }
  double width() const { return y_right - y_left; }
  double length() const { return x_front - x_rear; }
  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= x_rear && p.x() <= x_front && p.y() >= y_left &&
           p.y() <= y_right;
  }
};

/// Segment ids double as the corner tie-break priority (lowest wins).
enum class SegmentId { front = 0, right = 1, left = 2, rear = 3 };
inline constexpr std::array<SegmentId, 4> kAllSegments = {
    SegmentId::front, SegmentId::right, SegmentId::left, SegmentId::rear};

inline constexpr std::string_view to_string(SegmentId id) {
  switch (id) {
    case SegmentId::front: return "front";
    case SegmentId::right: return "right";
    case SegmentId::left: return "left";
    case SegmentId::rear: return "rear";
  }
  return "?";
}

inline constexpr int index_of(SegmentId id) { return static_cast<int>(id); }

/// One side of the rectangle. The side lies on {p : outward . p = offset}
/// and covers tangent coordinates [tangent_lo, tangent_hi] along the axis
/// orthogonal to the normal (world coordinates).
struct BoundarySegment {
  SegmentId id = SegmentId::front;
  Eigen::Vector2d inward_normal = {-1.0, 0.0};
  double offset = 0.0;
  double tangent_lo = 0.0;
  double tangent_hi = 0.0;

  Eigen::Vector2d outward() const { return -inward_normal; }
  bool normal_along_x() const { return inward_normal.x() != 0.0; }
  double length() const { return tangent_hi - tangent_lo; }
  /// Point on the side at tangent coordinate t.
  Eigen::Vector2d point_at(double t) const {
    return normal_along_x() ? Eigen::Vector2d(offset * outward().x(), t)
                            : Eigen::Vector2d(t, offset * outward().y());
  }
};

inline std::array<BoundarySegment, 4> segments(const HostRectangle& rect) {
  rect.validate();
  return {{
      {SegmentId::front, {-1.0, 0.0}, rect.x_front, rect.y_left, rect.y_right},
      {SegmentId::right, {0.0, -1.0}, rect.y_right, rect.x_rear, rect.x_front},
      {SegmentId::left, {0.0, 1.0}, -rect.y_left, rect.x_rear, rect.x_front},
      {SegmentId::rear, {1.0, 0.0}, -rect.x_rear, rect.y_left, rect.y_right},
  }};
}

/// Rigid map of (x, y, xdot, ydot) that takes a side onto the front-side
/// configuration: the side lies on x' = 0, the outside is x' > 0 and an
/// inward-moving target has xdot' < 0. The side covers y' in [lo, hi].
struct SegmentFrame {
  Eigen::Matrix4d linear = Eigen::Matrix4d::Identity();
  Eigen::Vector4d shift = Eigen::Vector4d::Zero();
  double lo = 0.0;
  double hi = 0.0;

  Eigen::Vector4d apply(const Eigen::Vector4d& v) const {
    return linear * v + shift;
  }
};

inline SegmentFrame segment_frame(const BoundarySegment& seg) {
  const Eigen::Vector2d out = seg.outward();
  Eigen::Matrix2d rot;
  rot << out.x(), out.y(), -out.y(), out.x();  // rows: outward, tangent'
  // The side's line: outward . p = offset.
  const Eigen::Vector2d on_line = seg.offset * out;
  SegmentFrame f;
  f.linear.setZero();
  f.linear.topLeftCorner<2, 2>() = rot;
  f.linear.bottomRightCorner<2, 2>() = rot;
  f.shift.head<2>() = -rot * on_line;
  const double a = (rot * seg.point_at(seg.tangent_lo) + f.shift.head<2>()).y();
  const double b = (rot * seg.point_at(seg.tangent_hi) + f.shift.head<2>()).y();
  f.lo = std::min(a, b);
  f.hi = std::max(a, b);
  return f;
}

/// Applies segment_frame to a density over (x, y, xdot, ydot).
inline GaussianDensity to_segment_frame(const GaussianDensity& g4,
                                        const BoundarySegment& seg) {
  if (g4.dim() != 4) throw ArgumentError("to_segment_frame: expected 4-dim density");
  const SegmentFrame f = segment_frame(seg);
  return {f.apply(g4.mean()),
          symmetrized(f.linear * g4.cov() * f.linear.transpose())};
}

inline GaussianDensity from_segment_frame(const GaussianDensity& g4,
                                          const BoundarySegment& seg) {
  if (g4.dim() != 4) throw ArgumentError("from_segment_frame: expected 4-dim density");
  const SegmentFrame f = segment_frame(seg);
  const Eigen::Matrix4d inv = f.linear.transpose();  // orthogonal
  return {inv * (g4.mean() - f.shift),
          symmetrized(inv * g4.cov() * inv.transpose())};
}

enum class CrossingKind { entry, exit };

/// Crossing of the chord p0 -> p1 through one side, at p0 + fraction (p1 - p0).
struct ChordCrossing {
  double fraction = 0.0;
  SegmentId segment = SegmentId::front;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  CrossingKind kind = CrossingKind::entry;
};

/// A time-stamped boundary crossing along a trajectory.
struct CrossingEvent {
  double time = 0.0;
  SegmentId segment = SegmentId::front;
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  CrossingKind kind = CrossingKind::entry;
};

/// Crossings of the chord p0 -> p1 with the closed rectangle, ordered along
/// the chord. A side is crossed when the outward signed distance changes
/// between > 0 and <= 0 at a point inside the side's closed extent. Hits
/// of the same kind at a corner collapse to the lowest segment id.
inline std::vector<ChordCrossing> detect_crossings(const Eigen::Vector2d& p0,
                                                   const Eigen::Vector2d& p1,
                                                   const HostRectangle& rect) {
  std::vector<ChordCrossing> out;
  if (p0 == p1) return out;
  if ((p0.x() > rect.x_front && p1.x() > rect.x_front) ||
      (p0.x() < rect.x_rear && p1.x() < rect.x_rear) ||
      (p0.y() > rect.y_right && p1.y() > rect.y_right) ||
      (p0.y() < rect.y_left && p1.y() < rect.y_left)) {
    return out;
  }
  constexpr double kEdgeSlack = 1e-12;
  constexpr double kSameFraction = 1e-12;
  const Eigen::Vector2d d = p1 - p0;
  for (const BoundarySegment& seg : segments(rect)) {
    const Eigen::Vector2d o = seg.outward();
    const double g0 = o.dot(p0) - seg.offset;
    const double g1 = o.dot(p1) - seg.offset;
    if ((g0 > 0.0) == (g1 > 0.0)) continue;
    const double f = g0 / (g0 - g1);
    Eigen::Vector2d hit = p0 + f * d;
    double& along = seg.normal_along_x() ? hit.y() : hit.x();
    double& across = seg.normal_along_x() ? hit.x() : hit.y();
    if (along < seg.tangent_lo - kEdgeSlack || along > seg.tangent_hi + kEdgeSlack) {
      continue;
    }
    along = std::clamp(along, seg.tangent_lo, seg.tangent_hi);
    across = seg.offset * (seg.normal_along_x() ? o.x() : o.y());
    const CrossingKind kind = g0 > 0.0 ? CrossingKind::entry : CrossingKind::exit;
    bool duplicate = false;
    for (const ChordCrossing& c : out) {
      if (c.kind == kind && std::abs(c.fraction - f) <= kSameFraction) {
        duplicate = true;  // corner: keep the earlier (lower id) side
        break;
      }
    }
    if (!duplicate) out.push_back({f, seg.id, hit, kind});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ChordCrossing& a, const ChordCrossing& b) {
                     if (a.fraction != b.fraction) return a.fraction < b.fraction;
                     return a.kind == CrossingKind::entry &&
                            b.kind == CrossingKind::exit;
                   });
  return out;
}

}  // namespace crossrate

#include "dal/sim/track.hpp"

#include <cmath>
#include <limits>

namespace dal::sim {
namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}

// center of an arc's circle; left turns have the center on the left
void arc_center(const TrackSegment& seg, double& cx, double& cy) {
  const double side = seg.turn >= 0 ? 1.0 : -1.0;
  cx = seg.x0 - side * std::sin(seg.h0) * seg.radius;
  cy = seg.y0 + side * std::cos(seg.h0) * seg.radius;
}

// angle from the circle center to the arc's start point
double arc_phi0(const TrackSegment& seg) {
  return seg.turn >= 0 ? seg.h0 - kPi / 2 : seg.h0 + kPi / 2;
}

}  // namespace

Track::Track(std::vector<TrackSegment> segments, double lane_width,
             int num_lanes)
    : segs_(std::move(segments)), lane_width_(lane_width),
      num_lanes_(num_lanes) {
  half_width_ = lane_width_ * num_lanes_ / 2.0;
  ego_lane_center_ = -half_width_ + lane_width_ / 2.0;
  chain();
  build_boundaries();
}

Track Track::default_track(double straight_len, double arc_radius,
                           double lane_width, int num_lanes) {
  std::vector<TrackSegment> segs;
  auto straight = [&] {
    TrackSegment s;
    s.is_arc = false;
    s.length = straight_len;
    segs.push_back(s);
  };
  auto arc = [&](double sign) {
    TrackSegment s;
    s.is_arc = true;
    s.radius = arc_radius;
    s.turn = sign * kPi / 2;
    s.length = arc_radius * kPi / 2;
    segs.push_back(s);
  };
  // meander: the four arcs alternate direction so both curve signs appear
  straight();
  arc(+1);
  straight();
  arc(-1);
  straight();
  arc(+1);
  straight();
  arc(-1);
  return Track(std::move(segs), lane_width, num_lanes);
}

void Track::chain() {
  double x = 0, y = 0, h = 0, s = 0;
  for (TrackSegment& seg : segs_) {
    seg.x0 = x;
    seg.y0 = y;
    seg.h0 = h;
    seg.s0 = s;
    if (seg.is_arc) {
      double cx, cy;
      arc_center(seg, cx, cy);
      const double phi1 = arc_phi0(seg) + seg.turn;
      x = cx + seg.radius * std::cos(phi1);
      y = cy + seg.radius * std::sin(phi1);
      h = wrap_pi(h + seg.turn);
      seg.length = seg.radius * std::abs(seg.turn);
    } else {
      x += seg.length * std::cos(h);
      y += seg.length * std::sin(h);
    }
    s += seg.length;
  }
  total_len_ = s;
}

void Track::build_boundaries() {
  boundaries_.clear();
  const double W = half_width_;
  for (const TrackSegment& seg : segs_) {
    if (!seg.is_arc) {
      const double nx = -std::sin(seg.h0), ny = std::cos(seg.h0);
      const double ex = seg.x0 + seg.length * std::cos(seg.h0);
      const double ey = seg.y0 + seg.length * std::sin(seg.h0);
      for (double side : {+1.0, -1.0}) {
        BoundaryPrim b;
        b.is_arc = false;
        b.ax = seg.x0 + side * W * nx;
        b.ay = seg.y0 + side * W * ny;
        b.bx = ex + side * W * nx;
        b.by = ey + side * W * ny;
        boundaries_.push_back(b);
      }
    } else {
      double cx, cy;
      arc_center(seg, cx, cy);
      const double sgn = seg.turn >= 0 ? 1.0 : -1.0;
      for (double side : {+1.0, -1.0}) {
        // lateral +W sits closer to the center on left turns
        BoundaryPrim b;
        b.is_arc = true;
        b.cx = cx;
        b.cy = cy;
        b.r = seg.radius - sgn * side * W;
        b.phi0 = arc_phi0(seg);
        b.sweep = seg.turn;
        if (b.r > 1e-9) boundaries_.push_back(b);
      }
    }
  }
}

void Track::pose_at(double s, double& x, double& y, double& heading) const {
  if (segs_.empty()) {
    x = y = heading = 0;
    return;
  }
  if (s < 0) s = 0;
  if (s > total_len_) s = total_len_;
  for (const TrackSegment& seg : segs_) {
    if (s > seg.s0 + seg.length + 1e-12) continue;
    const double u = s - seg.s0;
    if (!seg.is_arc) {
      x = seg.x0 + u * std::cos(seg.h0);
      y = seg.y0 + u * std::sin(seg.h0);
      heading = seg.h0;
    } else {
      const double sgn = seg.turn >= 0 ? 1.0 : -1.0;
      double cx, cy;
      arc_center(seg, cx, cy);
      const double phi = arc_phi0(seg) + sgn * u / seg.radius;
      x = cx + seg.radius * std::cos(phi);
      y = cy + seg.radius * std::sin(phi);
      heading = wrap_pi(seg.h0 + sgn * u / seg.radius);
    }
    return;
  }
  const TrackSegment& seg = segs_.back();
  pose_at(seg.s0 + seg.length, x, y, heading);
}

double Track::curvature_at(double s) const {
  for (const TrackSegment& seg : segs_) {
    if (s > seg.s0 + seg.length + 1e-12) continue;
    if (!seg.is_arc) return 0.0;
    return (seg.turn >= 0 ? 1.0 : -1.0) / seg.radius;
  }
  return 0.0;
}

TrackFrame Track::project(double px, double py) const {
  TrackFrame best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const TrackSegment& seg : segs_) {
    double u;  // arclength along this segment of the candidate point
    if (!seg.is_arc) {
      const double tx = std::cos(seg.h0), ty = std::sin(seg.h0);
      u = (px - seg.x0) * tx + (py - seg.y0) * ty;
      u = std::max(0.0, std::min(seg.length, u));
    } else {
      double cx, cy;
      arc_center(seg, cx, cy);
      const double sgn = seg.turn >= 0 ? 1.0 : -1.0;
      const double phi = std::atan2(py - cy, px - cx);
      double rel = wrap_pi(sgn * (phi - arc_phi0(seg)));
      rel = std::max(0.0, std::min(std::abs(seg.turn), rel));
      u = rel * seg.radius;
    }
    double cx2, cy2, ch;
    {
      // candidate pose at clamped arclength
      const double s_cand = seg.s0 + u;
      pose_at(s_cand, cx2, cy2, ch);
      const double dx = px - cx2, dy = py - cy2;
      const double dist = std::hypot(dx, dy);
      if (dist < best_dist) {
        best_dist = dist;
        best.s = s_cand;
        best.x = cx2;
        best.y = cy2;
        best.heading = ch;
        best.curvature = seg.is_arc ? (seg.turn >= 0 ? 1.0 : -1.0) / seg.radius
                                    : 0.0;
        // signed lateral: positive on the left of the tangent
        best.d = -std::sin(ch) * dx + std::cos(ch) * dy;
      }
    }
  }
  return best;
}

}  // namespace dal::sim

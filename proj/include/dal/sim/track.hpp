#pragma once

#include <vector>

namespace dal::sim {

// Piecewise centerline: straight pieces and circular arcs, chained C1.
struct TrackSegment {
  bool is_arc = false;
  double x0 = 0, y0 = 0, h0 = 0;  // start pose (filled by chaining)
  double length = 0;              // arclength of the piece
  double radius = 0;              // arcs only
  double turn = 0;                // arcs only: signed sweep in radians
  double s0 = 0;                  // cumulative arclength at segment start
};

// local road frame at the projection of a point
struct TrackFrame {
  double s = 0;          // arclength of the nearest centerline point
  double d = 0;          // signed lateral offset (+ = left of travel)
  double heading = 0;    // centerline heading there
  double curvature = 0;  // signed (+ = left turn)
  double x = 0, y = 0;   // the centerline point itself
};

// boundary geometry handed to the raycaster
struct BoundaryPrim {
  bool is_arc = false;
  double ax = 0, ay = 0, bx = 0, by = 0;  // line: endpoints
  double cx = 0, cy = 0, r = 0;           // arc: circle
  double phi0 = 0, sweep = 0;             // arc: angular interval
};

class Track {
 public:
  Track() = default;
  Track(std::vector<TrackSegment> segments, double lane_width, int num_lanes);

  // the default course: 4 straights and 4 alternating 90-degree arcs
  static Track default_track(double straight_len, double arc_radius,
                             double lane_width, int num_lanes);

  double length() const { return total_len_; }
  double lane_width() const { return lane_width_; }
  int num_lanes() const { return num_lanes_; }
  double half_width() const { return half_width_; }
  // center of the ego (rightmost) lane as a lateral offset
  double ego_lane_center() const { return ego_lane_center_; }

  void pose_at(double s, double& x, double& y, double& heading) const;
  double curvature_at(double s) const;

  TrackFrame project(double x, double y) const;

  // offset curves at lateral +/- half_width (for LiDAR and rendering)
  const std::vector<BoundaryPrim>& boundaries() const { return boundaries_; }

  const std::vector<TrackSegment>& segments() const { return segs_; }
  bool empty() const { return segs_.empty(); }

 private:
  void chain();
  void build_boundaries();

  std::vector<TrackSegment> segs_;
  std::vector<BoundaryPrim> boundaries_;
  double lane_width_ = 3.5;
  int num_lanes_ = 2;
  double half_width_ = 3.5;
  double ego_lane_center_ = -1.75;
  double total_len_ = 0;
};

}  // namespace dal::sim

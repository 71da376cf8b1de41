#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace dal::sim {

// normalized action: steering in [-1,1], speed command in [0,1]
struct Action {
  float steering = 0.0f;
  float speed = 0.0f;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, world frame
  double speed = 0.0;    // m/s
};

struct ObstacleState {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.5;
  double vx = 0.0;  // constant velocity; statics keep (0,0)
  double vy = 0.0;
  bool mover = false;
};

// What the learner sees. Image is HWC interleaved RGB in [0,255];
// lidar ranges are metres in (0, lidar_range].
struct Observation {
  std::vector<std::uint8_t> image;
  std::vector<float> lidar;
  float speed_norm = 0.0f;
};

using ObsPtr = std::shared_ptr<const Observation>;

struct StepInfo {
  double r_env = 0.0;
  bool done = false;
  bool collision = false;
  bool success = false;
  bool timeout = false;
  double d_min = 0.0;      // Euclidean gap to nearest obstacle, clamped
  double d_lane_m = 0.0;   // signed offset from ego lane center (+ = left)
  double d_lane_px = 0.0;  // d_lane_m * px_per_m
  double progress = 0.0;   // arclength along the track
  int steps = 0;
};

}  // namespace dal::sim

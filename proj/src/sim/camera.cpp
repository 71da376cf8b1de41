#include "dal/sim/camera.hpp"

#include <cmath>

namespace dal::sim {

int camera_sky_rows(int size) { return size / 4; }

double camera_row_distance(int row, int size) {
  const int sky = camera_sky_rows(size);
  const int ground_rows = size - sky;  // rows sky..size-1
  // u = 0 at the bottom row, 1 at the first ground row
  const double u = static_cast<double>(size - 1 - row) /
                   static_cast<double>(ground_rows - 1);
  return camera::kZNear *
         std::pow(camera::kZFar / camera::kZNear, u);
}

std::vector<std::uint8_t> render_pseudo_camera(
    const VehicleState& v, const std::vector<ObstacleState>& obstacles,
    const Track& track, int size) {
  std::vector<std::uint8_t> img(static_cast<size_t>(size) * size * 3);
  const int sky = camera_sky_rows(size);
  const double s_px = camera::kLateralPxPerM * size / 64.0;
  const double cx = (size - 1) / 2.0;
  const double tx = std::cos(v.heading), ty = std::sin(v.heading);
  const double nx = -ty, ny = tx;  // left normal

  auto put = [&](int row, int col, const std::uint8_t* c) {
    std::uint8_t* p = img.data() + (static_cast<size_t>(row) * size + col) * 3;
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  };

  for (int row = 0; row < size; ++row) {
    if (row < sky) {
      for (int col = 0; col < size; ++col) put(row, col, camera::kSky);
      continue;
    }
    const double z = camera_row_distance(row, size);
    for (int col = 0; col < size; ++col) {
      const double lat = (cx - col) / s_px;  // + = left of heading
      const double px = v.x + tx * z + nx * lat;
      const double py = v.y + ty * z + ny * lat;

      bool hit_obstacle = false;
      for (const ObstacleState& ob : obstacles) {
        const double dx = px - ob.x, dy = py - ob.y;
        if (dx * dx + dy * dy <= ob.radius * ob.radius) {
          hit_obstacle = true;
          break;
        }
      }
      if (hit_obstacle) {
        put(row, col, camera::kObstacle);
        continue;
      }

      if (track.empty()) {
        put(row, col, camera::kGrass);
        continue;
      }
      const TrackFrame f = track.project(px, py);
      const double W = track.half_width();
      const double ad = std::abs(f.d);
      // ensure the sample actually lies beside the projected point (segment
      // caps at the open track ends count as off-road)
      const double along = std::hypot(px - f.x, py - f.y);
      if (along > W + camera::kBoundaryHalfWidth + 1e-9 ||
          ad > W + camera::kBoundaryHalfWidth) {
        put(row, col, camera::kGrass);
        continue;
      }
      bool marking = std::abs(ad - W) <= camera::kBoundaryHalfWidth;
      if (!marking) {
        for (int k = 1; k < track.num_lanes(); ++k) {
          const double sep = -W + track.lane_width() * k;
          if (std::abs(f.d - sep) <= camera::kSeparatorHalfWidth &&
              std::fmod(f.s, camera::kDashPeriod) <
                  camera::kDashPeriod / 2.0) {
            marking = true;
            break;
          }
        }
      }
      put(row, col, marking ? camera::kMarking : camera::kRoad);
    }
  }
  return img;
}

}  // namespace dal::sim

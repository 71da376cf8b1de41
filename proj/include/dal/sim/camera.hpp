#pragma once

#include <cstdint>
#include <vector>

#include "dal/sim/track.hpp"
#include "dal/sim/types.hpp"

namespace dal::sim {

// Ground-plane pseudo camera. Weak perspective: columns map linearly to
// lateral offset at kLateralPxPerM px/m (scaled with image size), rows map
// exponentially to forward ground distance (near field at the bottom), the
// top quarter is sky. Colors are exact class constants.
namespace camera {
constexpr double kLateralPxPerM = 8.0;   // at image width 64
constexpr double kZNear = 1.0;           // metres, bottom ground row
constexpr double kZFar = 30.0;           // metres, top ground row
constexpr std::uint8_t kSky[3] = {70, 130, 200};
constexpr std::uint8_t kGrass[3] = {40, 110, 45};
constexpr std::uint8_t kRoad[3] = {95, 95, 100};
constexpr std::uint8_t kMarking[3] = {240, 240, 240};
constexpr std::uint8_t kObstacle[3] = {215, 40, 40};
constexpr double kBoundaryHalfWidth = 0.12;   // metres
constexpr double kSeparatorHalfWidth = 0.08;  // metres
constexpr double kDashPeriod = 4.0;           // metres (half painted)
}  // namespace camera

// HWC interleaved RGB, size*size*3 bytes
std::vector<std::uint8_t> render_pseudo_camera(
    const VehicleState& v, const std::vector<ObstacleState>& obstacles,
    const Track& track, int size);

// forward ground distance sampled by a ground row (rows sky_rows..size-1)
double camera_row_distance(int row, int size);
int camera_sky_rows(int size);

}  // namespace dal::sim

#pragma once

#include <vector>

#include "dal/sim/track.hpp"
#include "dal/sim/types.hpp"

namespace dal::sim {

// Range of a single ray against obstacle discs and road-boundary curves.
// Returns max_range when nothing is hit.
double ray_range(double ox, double oy, double angle,
                 const std::vector<ObstacleState>& obstacles,
                 const Track& track, double max_range);

// Full scan: `beams` rays spanning the forward half-plane uniformly,
// relative angles -90deg + i * (180deg / beams). Ranges are floored at a
// small epsilon so every entry stays positive.
std::vector<float> raycast_lidar(const VehicleState& v,
                                 const std::vector<ObstacleState>& obstacles,
                                 const Track& track, int beams,
                                 double max_range);

}  // namespace dal::sim

#include "dal/sim/lidar.hpp"

#include <cmath>

namespace dal::sim {
namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}

// nearest positive ray parameter hitting a full circle, or -1
double ray_circle(double ox, double oy, double dx, double dy, double cx,
                  double cy, double r, double& t2_out) {
  const double mx = ox - cx, my = oy - cy;
  const double b = mx * dx + my * dy;
  const double c = mx * mx + my * my - r * r;
  const double disc = b * b - c;
  t2_out = -1;
  if (disc < 0) return -1;
  const double sq = std::sqrt(disc);
  const double t1 = -b - sq, t2 = -b + sq;
  t2_out = t2;
  return t1;
}

}  // namespace

double ray_range(double ox, double oy, double angle,
                 const std::vector<ObstacleState>& obstacles,
                 const Track& track, double max_range) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  double best = max_range;

  for (const ObstacleState& ob : obstacles) {
    double t2;
    const double t1 = ray_circle(ox, oy, dx, dy, ob.x, ob.y, ob.radius, t2);
    double t = -1;
    if (t1 >= 0)
      t = t1;
    else if (t2 >= 0)
      t = 0;  // origin inside the disc
    if (t >= 0 && t < best) best = t;
  }

  for (const BoundaryPrim& b : track.boundaries()) {
    if (!b.is_arc) {
      // ray x segment
      const double ex = b.bx - b.ax, ey = b.by - b.ay;
      const double den = dx * ey - dy * ex;
      if (std::abs(den) < 1e-12) continue;
      const double qx = b.ax - ox, qy = b.ay - oy;
      const double t = (qx * ey - qy * ex) / den;
      const double u = (qx * dy - qy * dx) / (-den);
      if (t >= 0 && u >= 0 && u <= 1 && t < best) best = t;
    } else {
      double t2;
      const double t1 = ray_circle(ox, oy, dx, dy, b.cx, b.cy, b.r, t2);
      for (double t : {t1, t2}) {
        if (t < 0 || t >= best) continue;
        const double hx = ox + t * dx, hy = oy + t * dy;
        const double phi = std::atan2(hy - b.cy, hx - b.cx);
        const double sgn = b.sweep >= 0 ? 1.0 : -1.0;
        const double rel = wrap_pi(sgn * (phi - b.phi0));
        if (rel >= -1e-9 && rel <= std::abs(b.sweep) + 1e-9) best = t;
      }
    }
  }
  return best;
}

std::vector<float> raycast_lidar(const VehicleState& v,
                                 const std::vector<ObstacleState>& obstacles,
                                 const Track& track, int beams,
                                 double max_range) {
  std::vector<float> out(static_cast<size_t>(beams));
  for (int i = 0; i < beams; ++i) {
    const double rel = -kPi / 2 + kPi * static_cast<double>(i) / beams;
    double r = ray_range(v.x, v.y, v.heading + rel, obstacles, track,
                         max_range);
    if (r < 1e-3) r = 1e-3;  // ranges stay strictly positive
    out[static_cast<size_t>(i)] = static_cast<float>(r);
  }
  return out;
}

}  // namespace dal::sim

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/nn/core.hpp"

namespace dal::diffusion {

// smooth hazard level: 1 near contact, 0 far away
inline double hazard_tanh(double d_min, double s_h) {
  return std::clamp(1.0 - std::tanh(d_min / s_h), 0.0, 1.0);
}

// forward lidar compressed to a fixed number of sector minima
inline void lidar_sectors(const std::vector<float>& lidar, double out[5]) {
  const size_t n = lidar.size();
  for (int s = 0; s < 5; ++s) {
    const size_t lo = n * s / 5, hi = n * (s + 1) / 5;
    double m = lidar.empty() ? 0.0 : static_cast<double>(lidar[lo]);
    for (size_t i = lo; i < hi; ++i) m = std::min(m, static_cast<double>(lidar[i]));
    out[s] = m;
  }
}

// Scene snapshot the planner conditions and scores against. `hazard` is the
// tanh hazard level already computed from d_min; `expert` is an optional
// interleaved reference chunk [steer0, speed0, steer1, ...].
struct EnergyContext {
  double d_min = 10.0;
  double d_lane_m = 0.0;
  double d_lane_px = 0.0;
  double speed_norm = 0.0;
  double steering = 0.0;
  double hazard = 0.0;
  double sector_min[5] = {10.0, 10.0, 10.0, 10.0, 10.0};
  double d_max = 10.0;
  bool has_expert = false;
  Eigen::VectorXd expert;
};

// Interleaved-chunk energy. The lane and clearance terms score the current
// state (their weights rise with hazard); the jerk, stability and expert
// terms score the chunk itself and are the only sources of chunk gradient.
inline double chunk_energy(const Eigen::VectorXd& chunk,
                           const EnergyContext& ctx,
                           const RunConfig::Energy& ec) {
  const int h = static_cast<int>(chunk.size() / 2);
  const double w_lane = ec.w_base_lane * (1.0 + ec.alpha_hazard * ctx.hazard);
  const double w_lidar = ec.w_base_lidar * (1.0 + ctx.hazard);
  double e = w_lane * (ctx.d_lane_m / ec.s_lane) * (ctx.d_lane_m / ec.s_lane);
  const double gap = std::max(0.0, (ec.d_safe_plan - ctx.d_min) / ec.s_lidar);
  e += w_lidar * gap * gap;

  double jerk = 0.0;
  for (int t = 0; t + 1 < h; ++t) {
    const double ds = chunk(2 * (t + 1)) - chunk(2 * t);
    const double dv = chunk(2 * (t + 1) + 1) - chunk(2 * t + 1);
    jerk += ds * ds + dv * dv;
  }
  if (h > 1) e += ec.w_jerk * jerk / (h - 1);

  double stab = 0.0;
  for (int t = 0; t < h; ++t) {
    const double s = chunk(2 * t);
    const double dv = chunk(2 * t + 1) - ec.v_ref;
    stab += s * s + dv * dv;
  }
  e += ec.w_stab * stab / h;

  if (ctx.has_expert) {
    double dist = 0.0;
    for (int t = 0; t < h; ++t) {
      const double ds = chunk(2 * t) - ctx.expert(2 * t);
      const double dv = chunk(2 * t + 1) - ctx.expert(2 * t + 1);
      dist += ds * ds + dv * dv;
    }
    e += ec.w_expert * dist / h;
  }
  return e;
}

inline Eigen::VectorXd chunk_energy_grad(const Eigen::VectorXd& chunk,
                                         const EnergyContext& ctx,
                                         const RunConfig::Energy& ec) {
  const int h = static_cast<int>(chunk.size() / 2);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(chunk.size());
  if (h > 1) {
    const double cj = 2.0 * ec.w_jerk / (h - 1);
    for (int t = 0; t + 1 < h; ++t)
      for (int d = 0; d < 2; ++d) {
        const double diff = chunk(2 * (t + 1) + d) - chunk(2 * t + d);
        g(2 * (t + 1) + d) += cj * diff;
        g(2 * t + d) -= cj * diff;
      }
  }
  const double cs = 2.0 * ec.w_stab / h;
  for (int t = 0; t < h; ++t) {
    g(2 * t) += cs * chunk(2 * t);
    g(2 * t + 1) += cs * (chunk(2 * t + 1) - ec.v_ref);
  }
  if (ctx.has_expert) {
    const double ce = 2.0 * ec.w_expert / h;
    for (int t = 0; t < h; ++t)
      for (int d = 0; d < 2; ++d)
        g(2 * t + d) += ce * (chunk(2 * t + d) - ctx.expert(2 * t + d));
  }
  return g;
}

// Fixed-width conditioning vector for the denoiser; unused tail stays zero
// so the layout can grow without retraining shape changes.
inline constexpr int kContextDim = 64;

template <class S>
nn::Vec<S> build_context(const EnergyContext& ctx) {
  nn::Vec<S> v = nn::Vec<S>::Zero(kContextDim);
  v(0) = static_cast<S>(ctx.hazard);
  v(1) = static_cast<S>(ctx.d_lane_m / 3.0);
  v(2) = static_cast<S>(ctx.speed_norm);
  v(3) = static_cast<S>(ctx.steering);
  v(4) = static_cast<S>(ctx.d_min / ctx.d_max);
  for (int s = 0; s < 5; ++s)
    v(5 + s) = static_cast<S>(ctx.sector_min[s] / ctx.d_max);
  return v;
}

}  // namespace dal::diffusion

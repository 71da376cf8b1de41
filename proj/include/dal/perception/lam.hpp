#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace dal::perception {

// Attention-mask arithmetic. The mask is a vertical ramp over image rows
// whose bottom-row weight is modulated by speed and hazard through two
// learnable gains, then normalized by its own maximum:
//   f_speed  = 1 + alpha_speed * v_norm
//   f_hazard = 1 + alpha_lidar * h
//   w_lower  = w_base_lower * f_speed * f_hazard        (w_base_lower = 1)
//   M(y)     = w_lower * y / (H - 1)                    (top row 0)
//   Mhat(y)  = M(y) / (max_y M(y) + eps),   eps = 1e-6
// The normalization is differentiated through, so dMhat/dalpha is O(eps)
// but nonzero: gradients keep flowing to both alphas.

inline constexpr double kMaskEps = 1e-6;

inline double normalize_speed(double v, double v_max) {
  return std::clamp(v / v_max, 0.0, 1.0);
}

// linear proximity hazard driving the mask
inline double hazard_level_linear(double d_min, double d_safe) {
  return std::clamp((d_safe - d_min) / d_safe, 0.0, 1.0);
}

// per-sample mask state kept around for the backward pass
template <class S>
struct MaskBuild {
  S v_norm = 0, h = 0;
  S f_speed = 1, f_hazard = 1, w_lower = 1;
};

template <class S>
MaskBuild<S> build_mask(S alpha_speed, S alpha_lidar, S v_norm, S h) {
  MaskBuild<S> m;
  m.v_norm = v_norm;
  m.h = h;
  m.f_speed = S(1) + alpha_speed * v_norm;
  m.f_hazard = S(1) + alpha_lidar * h;
  m.w_lower = m.f_speed * m.f_hazard;
  return m;
}

// Mhat(y); rows y = 0 (top) .. H-1 (bottom)
template <class S>
S mask_value(const MaskBuild<S>& m, int y, int H) {
  const S ramp = S(y) / S(H - 1);
  return m.w_lower * ramp / (m.w_lower + S(kMaskEps));
}

// dMhat(y)/dw_lower (through the normalization)
template <class S>
S mask_dvalue_dw(const MaskBuild<S>& m, int y, int H) {
  const S ramp = S(y) / S(H - 1);
  const S denom = m.w_lower + S(kMaskEps);
  return ramp * S(kMaskEps) / (denom * denom);
}

// chain rule from w_lower back to the two alphas
template <class S>
S dw_dalpha_speed(const MaskBuild<S>& m) {
  return m.v_norm * m.f_hazard;
}
template <class S>
S dw_dalpha_lidar(const MaskBuild<S>& m) {
  return m.h * m.f_speed;
}

// full H x H mask (constant across columns), row-major, for PGM dumps
template <class S>
std::vector<S> mask_image(const MaskBuild<S>& m, int H) {
  std::vector<S> img(static_cast<size_t>(H) * H);
  for (int y = 0; y < H; ++y) {
    const S v = mask_value(m, y, H);
    std::fill_n(img.begin() + static_cast<std::ptrdiff_t>(y) * H, H, v);
  }
  return img;
}

}  // namespace dal::perception

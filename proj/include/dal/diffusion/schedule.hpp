#pragma once

#include <cmath>
#include <vector>

namespace dal::diffusion {

// Linear variance schedule. Index convention: step t in [1, T] uses beta(t);
// abar(t) is the running product of (1 - beta) up to t, and abar(0) = 1.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta_;   // beta_[k] = beta(k+1)
  std::vector<double> abar_;   // abar_[k] = abar(k), k in [0, T]

  static NoiseSchedule linear(int steps, double beta_min, double beta_max) {
    NoiseSchedule s;
    s.T = steps;
    s.beta_.resize(steps);
    s.abar_.resize(steps + 1);
    s.abar_[0] = 1.0;
    for (int k = 0; k < steps; ++k) {
      s.beta_[k] = steps > 1
                       ? beta_min + (beta_max - beta_min) * k / (steps - 1.0)
                       : beta_min;
      s.abar_[k + 1] = s.abar_[k] * (1.0 - s.beta_[k]);
    }
    return s;
  }

  double beta(int t) const { return beta_[t - 1]; }
  double alpha(int t) const { return 1.0 - beta_[t - 1]; }
  double abar(int t) const { return abar_[t]; }
};

// x0 estimate from a noisy sample and a noise prediction; the signal level
// is floored so the division stays bounded at the noisiest steps.
inline double predict_x0_coeffs(const NoiseSchedule& s, int t, double* c_noisy,
                                double* c_eps) {
  const double ab = std::max(s.abar(t), 1e-4);
  *c_noisy = 1.0 / std::sqrt(ab);
  *c_eps = -std::sqrt(1.0 - ab) / std::sqrt(ab);
  return ab;
}

}  // namespace dal::diffusion

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/core/rng.hpp"
#include "dal/nn/layers.hpp"
#include "dal/sim/types.hpp"

namespace dal::ppo {

// Actions are sampled in an unbounded pre-squash space u and mapped into the
// action box: steering = tanh(u0), speed = sigmoid(u1). Log-densities carry
// the change-of-variables corrections so they are densities over the box.

inline double squash_steer(double u) { return std::tanh(u); }
inline double squash_speed(double u) { return 1.0 / (1.0 + std::exp(-u)); }

inline double gauss_logp(double u, double mu, double sigma) {
  const double z = (u - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * 3.14159265358979323846);
}

// log |d tanh(u) / du|, guarded against saturation
inline double steer_squash_corr(double u) {
  const double t = std::tanh(u);
  return std::log(std::max(1.0 - t * t, 1e-12));
}

// log |d sigmoid(u) / du|
inline double speed_squash_corr(double u) {
  const double s = squash_speed(u);
  return std::log(std::max(s * (1.0 - s), 1e-12));
}

// joint log-density of the squashed action that u maps to
inline double squashed_logp(const double u[2], const double mu[2],
                            const double sigma[2]) {
  return gauss_logp(u[0], mu[0], sigma[0]) + gauss_logp(u[1], mu[1], sigma[1]) -
         steer_squash_corr(u[0]) - speed_squash_corr(u[1]);
}

struct PolicySample {
  sim::Action a;
  double u[2] = {0.0, 0.0};  // pre-squash coordinates (stored for reuse)
  double logp = 0.0;
};

// Gaussian policy head on top of a fixed-size embedding: two hidden layers,
// mean outputs per action dimension, and a global learnable log-std vector.
template <class S>
class PolicyHead {
 public:
  PolicyHead() = default;
  PolicyHead(int embed_dim, const RunConfig::Ppo& pc, Rng& rng)
      : h1_("pi.h1", embed_dim, 256, rng), h2_("pi.h2", 256, 256, rng),
        mu_("pi.mu", 256, 2, rng, /*relu_fan=*/false),
        log_std_("pi.log_std", 2, 1), lo_(pc.log_std_min), hi_(pc.log_std_max) {
    log_std_.w.setConstant(static_cast<S>(pc.log_std_init));
  }

  // pre-squash action means, one column per sample
  nn::Mat<S> mean_forward(const nn::Mat<S>& emb) {
    return mu_.forward(r2_.forward(h2_.forward(r1_.forward(h1_.forward(emb)))));
  }

  // backprop through the mean path; returns grad wrt the embedding
  nn::Mat<S> mean_backward(const nn::Mat<S>& g_mu) {
    return h1_.backward(r1_.backward(h2_.backward(r2_.backward(mu_.backward(g_mu)))));
  }

  double sigma(int i) const {
    return std::exp(std::clamp(static_cast<double>(log_std_.w(i, 0)), lo_, hi_));
  }

  // keeps the log-std inside its box after an optimizer step
  void project_log_std() {
    for (int i = 0; i < 2; ++i)
      log_std_.w(i, 0) = static_cast<S>(
          std::clamp(static_cast<double>(log_std_.w(i, 0)), lo_, hi_));
  }

  PolicySample act(const nn::Mat<S>& emb_col, Rng& rng, bool stochastic) {
    const nn::Mat<S> mu = mean_forward(emb_col);
    PolicySample s;
    const double m[2] = {static_cast<double>(mu(0, 0)),
                         static_cast<double>(mu(1, 0))};
    const double sg[2] = {sigma(0), sigma(1)};
    if (stochastic) {
      s.u[0] = m[0] + sg[0] * rng.normal();
      s.u[1] = m[1] + sg[1] * rng.normal();
    } else {
      s.u[0] = m[0];
      s.u[1] = m[1];
    }
    s.a.steering = static_cast<float>(squash_steer(s.u[0]));
    s.a.speed = static_cast<float>(squash_speed(s.u[1]));
    s.logp = squashed_logp(s.u, m, sg);
    return s;
  }

  // entropy of the pre-squash Gaussian (state independent: global sigma)
  double entropy() const {
    double h = 0.0;
    for (int i = 0; i < 2; ++i)
      h += std::log(sigma(i)) + 0.5 * std::log(2.0 * 3.14159265358979323846 * std::exp(1.0));
    return h;
  }

  void collect(std::vector<nn::Param<S>*>& ps) {
    h1_.collect(ps);
    h2_.collect(ps);
    mu_.collect(ps);
    ps.push_back(&log_std_);
  }

  nn::Param<S>& log_std() { return log_std_; }

 private:
  nn::Dense<S> h1_, h2_, mu_;
  nn::ReLU<S> r1_, r2_;
  nn::Param<S> log_std_;
  double lo_ = -5.0, hi_ = 1.0;
};

// State-value head sharing the embedding space with the policy.
template <class S>
class ValueHead {
 public:
  ValueHead() = default;
  ValueHead(int embed_dim, Rng& rng)
      : h1_("vf.h1", embed_dim, 256, rng), h2_("vf.h2", 256, 256, rng),
        out_("vf.out", 256, 1, rng, /*relu_fan=*/false) {}

  nn::Mat<S> forward(const nn::Mat<S>& emb) {
    return out_.forward(r2_.forward(h2_.forward(r1_.forward(h1_.forward(emb)))));
  }

  nn::Mat<S> backward(const nn::Mat<S>& g) {
    return h1_.backward(r1_.backward(h2_.backward(r2_.backward(out_.backward(g)))));
  }

  double value(const nn::Mat<S>& emb_col) {
    return static_cast<double>(forward(emb_col)(0, 0));
  }

  void collect(std::vector<nn::Param<S>*>& ps) {
    h1_.collect(ps);
    h2_.collect(ps);
    out_.collect(ps);
  }

 private:
  nn::Dense<S> h1_, h2_, out_;
  nn::ReLU<S> r1_, r2_;
};

}  // namespace dal::ppo

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/core/errors.hpp"
#include "dal/core/rng.hpp"
#include "dal/diffusion/energy.hpp"
#include "dal/diffusion/schedule.hpp"
#include "dal/diffusion/unet.hpp"
#include "dal/nn/losses.hpp"
#include "dal/nn/optim.hpp"
#include "dal/sim/types.hpp"

namespace dal::diffusion {

// shield activation: too close to an obstacle, or far off the lane center
inline bool trigger(double d_min, double d_lane_px, const RunConfig::Dal& dc) {
  return d_min < dc.d_trigger || std::abs(d_lane_px) > dc.e_lane_px;
}

inline double blend_weight_raw(double d_min, double d_lane_px,
                               const RunConfig::Dal& dc) {
  const double h = std::exp(-d_min / dc.blend_d_scale) +
                   dc.blend_px_coeff * std::tanh(std::abs(d_lane_px) / dc.blend_px_scale);
  return std::clamp(dc.w_base_blend + dc.w_scale_blend * h, 0.0, 1.0);
}

// EMA-smoothed authority of the planner over the policy; a critical gap
// bypasses the smoothing and hands over completely.
inline double blend_weight(double d_min, double d_lane_px, double prev_w,
                           const RunConfig::Dal& dc) {
  if (d_min < dc.d_critical) return 1.0;
  const double raw = blend_weight_raw(d_min, d_lane_px, dc);
  return dc.ema * prev_w + (1.0 - dc.ema) * raw;
}

inline sim::Action blend_action(const sim::Action& a_dal,
                                const sim::Action& a_ppo, double w) {
  sim::Action a;
  a.steering = static_cast<float>(std::clamp(
      w * a_dal.steering + (1.0 - w) * a_ppo.steering, -1.0, 1.0));
  a.speed = static_cast<float>(
      std::clamp(w * a_dal.speed + (1.0 - w) * a_ppo.speed, 0.0, 1.0));
  return a;
}

// Denoising planner over short action chunks. Owns the training corpus
// (a ring of expert chunks with their scene contexts), the denoiser, and
// the energy-guided reverse sampler.
template <class S>
class DiffusionPlanner {
 public:
  DiffusionPlanner() = default;
  DiffusionPlanner(const RunConfig& cfg, Rng& rng)
      : dc_(cfg.diffusion), ec_(cfg.energy), grad_clip_(cfg.train.grad_clip),
        sched_(NoiseSchedule::linear(cfg.diffusion.steps, cfg.diffusion.beta_min,
                                     cfg.diffusion.beta_max)),
        net_(cfg.diffusion.horizon, kContextDim, rng) {
    net_.collect(params_);
    opt_ = nn::Adam<S>(params_, dc_.lr);
    chunks_.setZero(2 * dc_.horizon, dc_.chunk_capacity);
    ctxs_.setZero(kContextDim, dc_.chunk_capacity);
  }

  int horizon() const { return dc_.horizon; }
  const NoiseSchedule& schedule() const { return sched_; }
  DenoiserUNet<S>& net() { return net_; }
  nn::Adam<S>& optimizer() { return opt_; }
  void collect(std::vector<nn::Param<S>*>& ps) { net_.collect(ps); }

  // --- corpus ring ---
  void add_chunk(const nn::Vec<S>& chunk, const nn::Vec<S>& ctx) {
    chunks_.col(head_) = chunk;
    ctxs_.col(head_) = ctx;
    head_ = (head_ + 1) % dc_.chunk_capacity;
    size_ = std::min(size_ + 1, dc_.chunk_capacity);
  }
  int corpus_size() const { return size_; }

  // --- training ---
  struct TrainStats {
    bool skipped = false;
    double loss = 0.0;
  };

  // one denoising regression step on a sampled minibatch
  double train_batch(const nn::Mat<S>& x0, const nn::Mat<S>& ctx, Rng& rng) {
    const Eigen::Index b = x0.cols();
    std::vector<int> t(static_cast<size_t>(b));
    nn::Mat<S> eps(x0.rows(), b), xt(x0.rows(), b);
    for (Eigen::Index j = 0; j < b; ++j) {
      t[static_cast<size_t>(j)] = rng.uniform_int(sched_.T) + 1;
      const double ab = sched_.abar(t[static_cast<size_t>(j)]);
      const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
      for (Eigen::Index i = 0; i < x0.rows(); ++i) {
        eps(i, j) = static_cast<S>(rng.normal());
        xt(i, j) = static_cast<S>(cs) * x0(i, j) + static_cast<S>(cn) * eps(i, j);
      }
    }
    opt_.zero_grad();
    const nn::Mat<S> eps_hat = net_.forward(xt, t, ctx);
    auto [loss, g] = nn::mse(eps_hat, eps);
    net_.backward(g);
    nn::clip_global_norm(params_, grad_clip_);
    opt_.step();
    return static_cast<double>(loss);
  }

  // a round of minibatches drawn uniformly from the corpus; skips when no
  // complete chunk has been assembled yet
  TrainStats train_round(int minibatches, Rng& rng) {
    TrainStats st;
    if (size_ == 0) {
      st.skipped = true;
      return st;
    }
    const int b = std::min(dc_.batch, size_);
    nn::Mat<S> x0(chunks_.rows(), b), cx(ctxs_.rows(), b);
    for (int m = 0; m < minibatches; ++m) {
      for (int j = 0; j < b; ++j) {
        const int k = rng.uniform_int(size_);
        x0.col(j) = chunks_.col(k);
        cx.col(j) = ctxs_.col(k);
      }
      st.loss += train_batch(x0, cx, rng);
    }
    st.loss /= minibatches;
    return st;
  }

  // closed-form x0 estimate given a noise prediction
  nn::Vec<S> predict_x0(const nn::Vec<S>& x, int t, const nn::Vec<S>& eps) const {
    double cx, ce;
    predict_x0_coeffs(sched_, t, &cx, &ce);
    return static_cast<S>(cx) * x + static_cast<S>(ce) * eps;
  }

  // Energy-guided reverse chain. Each step nudges the x0 estimate down the
  // (normalized) energy gradient before the posterior resampling, so the
  // noise consumption is identical whatever w_g is: w_g = 0 reproduces the
  // plain sampler draw for draw. The final chunk is clamped to the box.
  nn::Vec<S> sample(const nn::Vec<S>& ctx, const EnergyContext& ectx,
                    double w_g, Rng& rng, double* energy_before = nullptr,
                    double* energy_after = nullptr) {
    const int n = 2 * dc_.horizon;
    nn::Vec<S> x(n);
    for (int i = 0; i < n; ++i) x(i) = static_cast<S>(rng.normal());
    nn::Mat<S> cx = ctx;
    std::vector<int> tv(1);
    for (int t = sched_.T; t >= 1; --t) {
      tv[0] = t;
      const nn::Vec<S> eps = net_.forward(x, tv, cx);
      nn::Vec<S> x0 = predict_x0(x, t, eps);
      if (t == 1 && energy_before)
        *energy_before = chunk_energy(x0.template cast<double>(), ectx, ec_);
      if (w_g > 0.0) {
        const Eigen::VectorXd g =
            chunk_energy_grad(x0.template cast<double>(), ectx, ec_);
        const double norm = g.norm();
        x0 -= (w_g / (norm + 1e-8)) * g.template cast<S>();
      }
      if (t > 1) {
        const double ab = sched_.abar(t), abp = sched_.abar(t - 1);
        const double beta = sched_.beta(t), alpha = sched_.alpha(t);
        const double c0 = std::sqrt(abp) * beta / (1.0 - ab);
        const double c1 = std::sqrt(alpha) * (1.0 - abp) / (1.0 - ab);
        const double var = beta * (1.0 - abp) / (1.0 - ab);
        const double sd = std::sqrt(std::max(var, 0.0));
        for (int i = 0; i < n; ++i)
          x(i) = static_cast<S>(c0 * static_cast<double>(x0(i)) +
                                c1 * static_cast<double>(x(i)) +
                                sd * rng.normal());
      } else {
        x = x0;
      }
    }
    for (int t = 0; t < dc_.horizon; ++t) {
      x(2 * t) = static_cast<S>(std::clamp(static_cast<double>(x(2 * t)), -1.0, 1.0));
      x(2 * t + 1) =
          static_cast<S>(std::clamp(static_cast<double>(x(2 * t + 1)), 0.0, 1.0));
    }
    if (energy_after)
      *energy_after = chunk_energy(x.template cast<double>(), ectx, ec_);
    return x;
  }

  // --- corpus serialization (exact ring state) ---
  void save_corpus(std::ostream& os) const {
    const std::int32_t hdr[3] = {size_, head_, static_cast<std::int32_t>(chunks_.rows())};
    os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    for (int j = 0; j < size_; ++j) {
      os.write(reinterpret_cast<const char*>(chunks_.col(j).data()),
               chunks_.rows() * sizeof(S));
      os.write(reinterpret_cast<const char*>(ctxs_.col(j).data()),
               ctxs_.rows() * sizeof(S));
    }
  }

  void load_corpus(std::istream& is) {
    std::int32_t hdr[3] = {0, 0, 0};
    is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    if (hdr[2] != chunks_.rows())
      throw IoError("chunk store dimension mismatch");
    size_ = hdr[0];
    head_ = hdr[1];
    for (int j = 0; j < size_; ++j) {
      is.read(reinterpret_cast<char*>(chunks_.col(j).data()),
              chunks_.rows() * sizeof(S));
      is.read(reinterpret_cast<char*>(ctxs_.col(j).data()),
              ctxs_.rows() * sizeof(S));
    }
  }

 private:
  RunConfig::Diffusion dc_;
  RunConfig::Energy ec_;
  double grad_clip_ = 0.5;
  NoiseSchedule sched_;
  DenoiserUNet<S> net_;
  std::vector<nn::Param<S>*> params_;
  nn::Adam<S> opt_;
  nn::Mat<S> chunks_, ctxs_;
  int size_ = 0, head_ = 0;
};

}  // namespace dal::diffusion

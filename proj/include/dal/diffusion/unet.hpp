#pragma once

#include <cassert>
#include <cmath>
#include <vector>

#include "dal/core/rng.hpp"
#include "dal/nn/layers.hpp"

namespace dal::diffusion {

// Feature-wise affine modulation: y = h .* (1 + scale) + shift, where scale
// and shift are per (channel, sample) and broadcast over time positions.
// `sb` stacks scales on top of shifts ((2C) x B). Zero conditioning is the
// identity, which keeps the freshly initialized net well behaved.
template <class S>
class Film {
 public:
  Film() = default;
  Film(int channels, int len) : c_(channels), len_(len) {}

  nn::Mat<S> forward(const nn::Mat<S>& h, const nn::Mat<S>& sb) {
    h_ = h;
    sb_ = sb;
    nn::Mat<S> y(h.rows(), h.cols());
    for (Eigen::Index s = 0; s < h.cols(); ++s)
      for (int t = 0; t < len_; ++t)
        for (int c = 0; c < c_; ++c) {
          const Eigen::Index r = static_cast<Eigen::Index>(t) * c_ + c;
          y(r, s) = h(r, s) * (S(1) + sb(c, s)) + sb(c_ + c, s);
        }
    return y;
  }

  // returns grad wrt h and accumulates grad wrt sb into g_sb
  nn::Mat<S> backward(const nn::Mat<S>& gy, nn::Mat<S>& g_sb) {
    nn::Mat<S> gh(gy.rows(), gy.cols());
    g_sb.setZero(2 * c_, gy.cols());
    for (Eigen::Index s = 0; s < gy.cols(); ++s)
      for (int t = 0; t < len_; ++t)
        for (int c = 0; c < c_; ++c) {
          const Eigen::Index r = static_cast<Eigen::Index>(t) * c_ + c;
          gh(r, s) = gy(r, s) * (S(1) + sb_(c, s));
          g_sb(c, s) += gy(r, s) * h_(r, s);
          g_sb(c_ + c, s) += gy(r, s);
        }
    return gh;
  }

 private:
  int c_ = 0, len_ = 0;
  nn::Mat<S> h_, sb_;
};

// Small 1D U-Net over interleaved action chunks ((t*2 + dim) layout):
// encode -> downsample -> bottleneck -> upsample -> skip add -> project.
// Conditioning: a sinusoidal embedding of the diffusion step concatenated
// with the context vector feeds a shared MLP whose output modulates every
// level through FiLM heads. Predicts the injected noise.
template <class S>
class DenoiserUNet {
 public:
  static constexpr int kTimeDim = 32;

  DenoiserUNet() = default;
  DenoiserUNet(int horizon, int ctx_dim, Rng& rng)
      : h_(horizon), ctx_dim_(ctx_dim),
        e1_("ddpm.e1", 2, horizon, 32, 3, 1, 1, rng),
        dn_("ddpm.dn", 32, horizon, 64, 3, 2, 1, rng),
        mid_("ddpm.mid", 64, horizon / 2, 64, 3, 1, 1, rng),
        up_(64, horizon / 2),
        upc_("ddpm.up", 64, horizon, 32, 3, 1, 1, rng),
        out_("ddpm.out", 32, horizon, 2, 3, 1, 1, rng),
        cmlp_("ddpm.cmlp1", ctx_dim + kTimeDim, 128, rng),
        f0_("ddpm.film0", 128, 2 * 32, rng, /*relu_fan=*/false),
        f1_("ddpm.film1", 128, 2 * 64, rng, /*relu_fan=*/false),
        f2_("ddpm.film2", 128, 2 * 64, rng, /*relu_fan=*/false),
        film0_(32, horizon), film1_(64, horizon / 2), film2_(64, horizon / 2) {
    assert(horizon % 2 == 0);
    // identity modulation at init
    f0_.weight().w.setZero();
    f1_.weight().w.setZero();
    f2_.weight().w.setZero();
  }

  static nn::Mat<S> time_embedding(const std::vector<int>& t) {
    const int half = kTimeDim / 2;
    nn::Mat<S> e(kTimeDim, static_cast<Eigen::Index>(t.size()));
    for (size_t s = 0; s < t.size(); ++s)
      for (int i = 0; i < half; ++i) {
        const double w = std::exp(-std::log(10000.0) * i / (half - 1.0));
        e(2 * i, static_cast<Eigen::Index>(s)) = static_cast<S>(std::sin(t[s] * w));
        e(2 * i + 1, static_cast<Eigen::Index>(s)) = static_cast<S>(std::cos(t[s] * w));
      }
    return e;
  }

  nn::Mat<S> forward(const nn::Mat<S>& x, const std::vector<int>& t,
                     const nn::Mat<S>& ctx) {
    const Eigen::Index B = x.cols();
    nn::Mat<S> cin(ctx_dim_ + kTimeDim, B);
    cin.topRows(ctx_dim_) = ctx;
    cin.bottomRows(kTimeDim) = time_embedding(t);
    const nn::Mat<S> ch = rc_.forward(cmlp_.forward(cin));
    const nn::Mat<S> sb0 = f0_.forward(ch);
    const nn::Mat<S> sb1 = f1_.forward(ch);
    const nn::Mat<S> sb2 = f2_.forward(ch);

    const nn::Mat<S> h1 = r1_.forward(e1_.forward(x));
    h1f_ = film0_.forward(h1, sb0);
    const nn::Mat<S> hd = r2_.forward(dn_.forward(h1f_));
    const nn::Mat<S> hdf = film1_.forward(hd, sb1);
    const nn::Mat<S> hm = r3_.forward(mid_.forward(hdf));
    const nn::Mat<S> hmf = film2_.forward(hm, sb2);
    const nn::Mat<S> hu = r4_.forward(upc_.forward(up_.forward(hmf)));
    return out_.forward(hu + h1f_);
  }

  // accumulates parameter grads; returns grad wrt x (rarely needed)
  nn::Mat<S> backward(const nn::Mat<S>& g_eps) {
    const nn::Mat<S> g_hs = out_.backward(g_eps);
    const nn::Mat<S> g_hmf = up_.backward(upc_.backward(r4_.backward(g_hs)));
    nn::Mat<S> g_sb2, g_sb1, g_sb0;
    const nn::Mat<S> g_hm = film2_.backward(g_hmf, g_sb2);
    const nn::Mat<S> g_hdf = mid_.backward(r3_.backward(g_hm));
    const nn::Mat<S> g_hd = film1_.backward(g_hdf, g_sb1);
    nn::Mat<S> g_h1f = dn_.backward(r2_.backward(g_hd));
    g_h1f += g_hs;  // skip connection
    const nn::Mat<S> g_h1 = film0_.backward(g_h1f, g_sb0);
    const nn::Mat<S> gx = e1_.backward(r1_.backward(g_h1));

    nn::Mat<S> g_ch = f0_.backward(g_sb0);
    g_ch += f1_.backward(g_sb1);
    g_ch += f2_.backward(g_sb2);
    cmlp_.backward(rc_.backward(g_ch));
    return gx;
  }

  void collect(std::vector<nn::Param<S>*>& ps) {
    e1_.collect(ps);
    dn_.collect(ps);
    mid_.collect(ps);
    upc_.collect(ps);
    out_.collect(ps);
    cmlp_.collect(ps);
    f0_.collect(ps);
    f1_.collect(ps);
    f2_.collect(ps);
  }

  int horizon() const { return h_; }
  int ctx_dim() const { return ctx_dim_; }

 private:
  int h_ = 0, ctx_dim_ = 0;
  nn::Conv1D<S> e1_, dn_, mid_, upc_, out_;
  nn::Upsample1D<S> up_;
  nn::Dense<S> cmlp_, f0_, f1_, f2_;
  nn::ReLU<S> r1_, r2_, r3_, r4_, rc_;
  Film<S> film0_, film1_, film2_;
  nn::Mat<S> h1f_;
};

}  // namespace dal::diffusion

#pragma once

#include <limits>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/nn/layers.hpp"
#include "dal/perception/lam.hpp"
#include "dal/sim/types.hpp"

namespace dal::perception {

using nn::Mat;

// Shared observation encoder: a 3-conv vision branch over the mask-augmented
// 4-channel image, a 3-layer LiDAR MLP, and a fusion MLP emitting the 512-dim
// state embedding. The mask gains (alphas) are trainable parameters whose
// gradient arrives through the 4th input channel.
template <class S>
class Encoder {
 public:
  Encoder() = default;
  Encoder(const RunConfig& cfg, Rng& rng)
      : sim_(cfg.sim), img_(cfg.sim.image_size),
        c1_("enc.c1", 4, img_, img_, 16, 5, 2, rng),
        c2_("enc.c2", 16, c1_.out_h(), c1_.out_w(), 32, 3, 2, rng),
        c3_("enc.c3", 32, c2_.out_h(), c2_.out_w(), 64, 3, 2, rng),
        l1_("enc.l1", cfg.sim.lidar_beams, 128, rng),
        l2_("enc.l2", 128, 64, rng), l3_("enc.l3", 64, 32, rng),
        f1_("enc.f1", c3_.out_dim() + 32, 256, rng),
        f2_("enc.f2", 256, 512, rng, /*relu_fan=*/false),
        alphas_("lam.alphas", 2, 1) {
    alphas_.w.setConstant(S(cfg.lam.alpha_init));
  }

  int embed_dim() const { return 512; }

  // lidar scan minimum in metres; the proximity signal the mask reacts to
  static double scan_min(const sim::Observation& o) {
    double m = std::numeric_limits<double>::max();
    for (float r : o.lidar) m = std::min(m, static_cast<double>(r));
    return m;
  }

  Mat<S> forward(const std::vector<sim::ObsPtr>& batch) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    Mat<S> x = assemble(batch);
    Mat<S> h = r3_.forward(c3_.forward(r2_.forward(c2_.forward(
        r1_.forward(c1_.forward(x))))));

    Mat<S> lid(sim_.lidar_beams, B);
    for (Eigen::Index b = 0; b < B; ++b)
      for (int i = 0; i < sim_.lidar_beams; ++i)
        lid(i, b) = S(batch[static_cast<size_t>(b)]->lidar[static_cast<size_t>(i)] /
                      sim_.lidar_range);
    Mat<S> zl = lr3_.forward(l3_.forward(
        lr2_.forward(l2_.forward(lr1_.forward(l1_.forward(lid))))));

    Mat<S> z(h.rows() + zl.rows(), B);
    z.topRows(h.rows()) = h;
    z.bottomRows(zl.rows()) = zl;
    return f2_.forward(fr1_.forward(f1_.forward(z)));
  }

  // gradient wrt the embedding; accumulates into every parameter
  void backward(const Mat<S>& g) {
    Mat<S> gz = f1_.backward(fr1_.backward(f2_.backward(g)));
    const Eigen::Index conv_rows = gz.rows() - 32;
    Mat<S> gl = l1_.backward(lr1_.backward(l2_.backward(lr2_.backward(
        l3_.backward(lr3_.backward(gz.bottomRows(32)))))));
    (void)gl;
    Mat<S> gx = c1_.backward(r1_.backward(c2_.backward(r2_.backward(
        c3_.backward(r3_.backward(gz.topRows(conv_rows)))))));
    if (!lam_enabled_) return;

    // mask channel (index 3 of 4) -> w_lower -> alphas, per sample
    const int W = img_, H = img_;
    for (Eigen::Index b = 0; b < gx.cols(); ++b) {
      const MaskBuild<S>& m = masks_[static_cast<size_t>(b)];
      S gw = S(0);
      for (int y = 0; y < H; ++y) {
        S row_sum = S(0);
        for (int xcol = 0; xcol < W; ++xcol)
          row_sum += gx((static_cast<Eigen::Index>(y) * W + xcol) * 4 + 3, b);
        gw += row_sum * mask_dvalue_dw(m, y, H);
      }
      alphas_.g(0, 0) += gw * dw_dalpha_speed(m);
      alphas_.g(1, 0) += gw * dw_dalpha_lidar(m);
    }
  }

  // parameter list: conv + lidar + fusion + alphas (alphas last)
  void collect(std::vector<nn::Param<S>*>& ps) {
    c1_.collect(ps);
    c2_.collect(ps);
    c3_.collect(ps);
    l1_.collect(ps);
    l2_.collect(ps);
    l3_.collect(ps);
    f1_.collect(ps);
    f2_.collect(ps);
    ps.push_back(&alphas_);
  }

  nn::Param<S>& alphas() { return alphas_; }

  // "adaptation off": pin both gains to zero (the mask degenerates to the
  // input-independent fixed ramp) and stop their gradient accumulation
  void set_lam_enabled(bool on) {
    lam_enabled_ = on;
    if (!on) alphas_.w.setZero();
  }
  bool lam_enabled() const { return lam_enabled_; }

  // copy every parameter value (frozen feature extractors)
  void copy_from(Encoder& other) {
    std::vector<nn::Param<S>*> a, b;
    collect(a);
    other.collect(b);
    for (size_t i = 0; i < a.size(); ++i) a[i]->w = b[i]->w;
  }

  // mask state for a single observation (export + tests)
  MaskBuild<S> mask_for(const sim::Observation& o) const {
    const S v = S(o.speed_norm);
    const S h = S(hazard_level_linear(scan_min(o), sim_.d_safe));
    return build_mask(alphas_.w(0, 0), alphas_.w(1, 0), v, h);
  }

 private:
  // 4-channel input assembly: RGB/255 in channels 0-2, mask in channel 3
  Mat<S> assemble(const std::vector<sim::ObsPtr>& batch) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    const int W = img_, H = img_;
    Mat<S> x(static_cast<Eigen::Index>(H) * W * 4, B);
    masks_.resize(static_cast<size_t>(B));
    for (Eigen::Index b = 0; b < B; ++b) {
      const sim::Observation& o = *batch[static_cast<size_t>(b)];
      masks_[static_cast<size_t>(b)] = mask_for(o);
      const MaskBuild<S>& m = masks_[static_cast<size_t>(b)];
      S* col = x.col(b).data();
      for (int y = 0; y < H; ++y) {
        const S mv = mask_value(m, y, H);
        for (int xcol = 0; xcol < W; ++xcol) {
          const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(y) * W + xcol;
          col[p * 4 + 0] = S(o.image[p * 3 + 0]) / S(255);
          col[p * 4 + 1] = S(o.image[p * 3 + 1]) / S(255);
          col[p * 4 + 2] = S(o.image[p * 3 + 2]) / S(255);
          col[p * 4 + 3] = mv;
        }
      }
    }
    return x;
  }

  RunConfig::Sim sim_;
  bool lam_enabled_ = true;
  int img_ = 64;
  nn::Conv2D<S> c1_, c2_, c3_;
  nn::ReLU<S> r1_, r2_, r3_;
  nn::Dense<S> l1_, l2_, l3_;
  nn::ReLU<S> lr1_, lr2_, lr3_;
  nn::Dense<S> f1_, f2_;
  nn::ReLU<S> fr1_;
  nn::Param<S> alphas_;
  std::vector<MaskBuild<S>> masks_;
};

}  // namespace dal::perception

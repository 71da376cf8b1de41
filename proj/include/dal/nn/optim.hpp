#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dal/nn/core.hpp"

namespace dal::nn {

// Scales every gradient so the joint global L2 norm is at most max_norm.
// Returns the pre-clip norm.
template <class S>
double clip_global_norm(const std::vector<Param<S>*>& ps, double max_norm) {
  double sq = 0;
  for (const Param<S>* p : ps) sq += static_cast<double>(p->g.squaredNorm());
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const S scale = static_cast<S>(max_norm / norm);
    for (Param<S>* p : ps) p->g *= scale;
  }
  return norm;
}

template <class S>
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Param<S>*> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : ps_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    m_.reserve(ps_.size());
    v_.reserve(ps_.size());
    for (Param<S>* p : ps_) {
      m_.push_back(Mat<S>::Zero(p->w.rows(), p->w.cols()));
      v_.push_back(Mat<S>::Zero(p->w.rows(), p->w.cols()));
    }
  }

  void zero_grad() {
    for (Param<S>* p : ps_) p->zero_grad();
  }

  void step() {
    ++t_;
    const S c1 = static_cast<S>(1.0 - std::pow(b1_, t_));
    const S c2 = static_cast<S>(1.0 - std::pow(b2_, t_));
    const S lr = static_cast<S>(lr_);
    const S b1 = static_cast<S>(b1_), b2 = static_cast<S>(b2_);
    const S eps = static_cast<S>(eps_);
    for (size_t i = 0; i < ps_.size(); ++i) {
      Param<S>& p = *ps_[i];
      m_[i] = b1 * m_[i] + (S(1) - b1) * p.g;
      v_[i] = (b2 * v_[i].array() + (S(1) - b2) * p.g.array().square()).matrix();
      // bias-corrected update
      p.w.array() -=
          lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  std::int64_t steps() const { return t_; }
  const std::vector<Param<S>*>& params() const { return ps_; }

  // moment access for checkpointing (index-aligned with params)
  std::vector<Mat<S>>& m() { return m_; }
  std::vector<Mat<S>>& v() { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  std::vector<Param<S>*> ps_;
  std::vector<Mat<S>> m_, v_;
  double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
};

// Halves the learning rate when the monitored loss has not improved on the
// best seen value by more than `eps` for `patience` consecutive observations.
class PlateauScheduler {
 public:
  PlateauScheduler() = default;
  PlateauScheduler(int patience, double eps, double floor)
      : patience_(patience), eps_(eps), floor_(floor) {}

  // feeds one evaluation; returns true when the rate was halved
  template <class Opt>
  bool observe(double loss, Opt& opt) {
    if (loss < best_ - eps_) {
      best_ = loss;
      bad_ = 0;
      return false;
    }
    if (++bad_ >= patience_) {
      bad_ = 0;
      opt.set_lr(std::max(opt.lr() / 2.0, floor_));
      return true;
    }
    return false;
  }

  double best() const { return best_; }
  int bad_count() const { return bad_; }
  void restore(double best, int bad) {
    best_ = best;
    bad_ = bad;
  }

 private:
  int patience_ = 5;
  double eps_ = 1e-4;
  double floor_ = 1e-6;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_ = 0;
};

}  // namespace dal::nn

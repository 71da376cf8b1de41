#pragma once

#include <cassert>
#include <memory>

#include "dal/nn/core.hpp"

namespace dal::nn {

// Layers cache whatever the backward pass needs. Gradients ACCUMULATE into
// Param::g; call zero_grad on the optimizer before each loss backward.

template <class S>
class Dense {
 public:
  Dense() = default;
  Dense(std::string name, Eigen::Index in, Eigen::Index out, Rng& rng,
        bool relu_fan = true)
      : W_(name + ".W", out, in), b_(name + ".b", out, 1) {
    if (relu_fan)
      init_he(W_, in, rng);
    else
      init_xavier(W_, in, out, rng);
  }

  Mat<S> forward(const Mat<S>& x) {
    x_ = x;
    Mat<S> y = W_.w * x;
    y.colwise() += b_.w.col(0);
    return y;
  }

  // returns grad wrt input
  Mat<S> backward(const Mat<S>& gy) {
    W_.g.noalias() += gy * x_.transpose();
    b_.g.col(0).noalias() += gy.rowwise().sum();
    return W_.w.transpose() * gy;
  }

  void collect(std::vector<Param<S>*>& ps) {
    ps.push_back(&W_);
    ps.push_back(&b_);
  }

  Param<S>& weight() { return W_; }
  Param<S>& bias() { return b_; }

 private:
  Param<S> W_, b_;
  Mat<S> x_;
};

template <class S>
class ReLU {
 public:
  Mat<S> forward(const Mat<S>& x) {
    y_ = x.cwiseMax(S(0));
    return y_;
  }
  Mat<S> backward(const Mat<S>& gy) {
    return ((y_.array() > S(0)).template cast<S>() * gy.array()).matrix();
  }

 private:
  Mat<S> y_;
};

template <class S>
class Tanh {
 public:
  Mat<S> forward(const Mat<S>& x) {
    y_ = x.array().tanh().matrix();
    return y_;
  }
  Mat<S> backward(const Mat<S>& gy) {
    return (gy.array() * (S(1) - y_.array().square())).matrix();
  }

 private:
  Mat<S> y_;
};

template <class S>
class Sigmoid {
 public:
  Mat<S> forward(const Mat<S>& x) {
    y_ = (S(1) / (S(1) + (-x.array()).exp())).matrix();
    return y_;
  }
  Mat<S> backward(const Mat<S>& gy) {
    return (gy.array() * y_.array() * (S(1) - y_.array())).matrix();
  }

 private:
  Mat<S> y_;
};

// 2D convolution over channel-interleaved images: the feature vector of a
// (C,H,W) activation stores channel c of pixel (y,x) at ((y*W + x)*C + c).
// im2col + GEMM; output layout matches the same convention, so stacking
// conv layers needs no reshuffling.
template <class S>
class Conv2D {
 public:
  Conv2D() = default;
  Conv2D(std::string name, int in_c, int in_h, int in_w, int out_c, int k,
         int stride, Rng& rng)
      : in_c_(in_c), in_h_(in_h), in_w_(in_w), out_c_(out_c), k_(k),
        stride_(stride), out_h_((in_h - k) / stride + 1),
        out_w_((in_w - k) / stride + 1),
        K_(name + ".K", k * k * in_c, out_c), b_(name + ".b", out_c, 1) {
    init_he(K_, k * k * in_c, rng);
  }

  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }
  int out_dim() const { return out_h_ * out_w_ * out_c_; }
  int in_dim() const { return in_h_ * in_w_ * in_c_; }

  Mat<S> forward(const Mat<S>& x) {
    const Eigen::Index B = x.cols();
    const int P = out_h_ * out_w_;
    const int R = k_ * k_ * in_c_;
    cols_.resize(static_cast<size_t>(B));
    Mat<S> y(out_dim(), B);
    for (Eigen::Index s = 0; s < B; ++s) {
      Mat<S>& col = cols_[static_cast<size_t>(s)];
      col.resize(R, P);
      im2col(x.col(s).data(), col);
      // (P x out_c) = col^T (P x R) * K (R x out_c); column-major memory of
      // the (out_c x P) transpose view is exactly the interleaved layout.
      Eigen::Map<Mat<S>> out(y.col(s).data(), out_c_, P);
      out.noalias() = K_.w.transpose() * col;
      out.colwise() += b_.w.col(0);
    }
    return y;
  }

  Mat<S> backward(const Mat<S>& gy) {
    const Eigen::Index B = gy.cols();
    const int P = out_h_ * out_w_;
    Mat<S> gx = Mat<S>::Zero(in_dim(), B);
    for (Eigen::Index s = 0; s < B; ++s) {
      Eigen::Map<const Mat<S>> go(gy.col(s).data(), out_c_, P);
      const Mat<S>& col = cols_[static_cast<size_t>(s)];
      K_.g.noalias() += col * go.transpose();
      b_.g.col(0).noalias() += go.rowwise().sum();
      Mat<S> gcol = K_.w * go;  // (R x P)
      col2im(gcol, gx.col(s).data());
    }
    return gx;
  }

  void collect(std::vector<Param<S>*>& ps) {
    ps.push_back(&K_);
    ps.push_back(&b_);
  }

 private:
  void im2col(const S* x, Mat<S>& col) const {
    for (int oy = 0; oy < out_h_; ++oy)
      for (int ox = 0; ox < out_w_; ++ox) {
        const int p = oy * out_w_ + ox;
        S* dst = col.data() + static_cast<std::ptrdiff_t>(p) * col.rows();
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ + ky;
          const S* src = x + (static_cast<std::ptrdiff_t>(iy) * in_w_ +
                              ox * stride_) * in_c_;
          // k_ * in_c_ contiguous values per kernel row
          std::copy(src, src + static_cast<std::ptrdiff_t>(k_) * in_c_,
                    dst + static_cast<std::ptrdiff_t>(ky) * k_ * in_c_);
        }
      }
  }

  void col2im(const Mat<S>& gcol, S* gx) const {
    for (int oy = 0; oy < out_h_; ++oy)
      for (int ox = 0; ox < out_w_; ++ox) {
        const int p = oy * out_w_ + ox;
        const S* src = gcol.data() + static_cast<std::ptrdiff_t>(p) * gcol.rows();
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ + ky;
          S* dst = gx + (static_cast<std::ptrdiff_t>(iy) * in_w_ +
                         ox * stride_) * in_c_;
          const S* s0 = src + static_cast<std::ptrdiff_t>(ky) * k_ * in_c_;
          for (int i = 0; i < k_ * in_c_; ++i) dst[i] += s0[i];
        }
      }
  }

  int in_c_ = 0, in_h_ = 0, in_w_ = 0, out_c_ = 0, k_ = 0, stride_ = 0;
  int out_h_ = 0, out_w_ = 0;
  Param<S> K_, b_;
  std::vector<Mat<S>> cols_;
};

// 1D convolution over channel-interleaved sequences ((t*C + c) layout),
// with zero padding. Used by the action-chunk denoiser.
template <class S>
class Conv1D {
 public:
  Conv1D() = default;
  Conv1D(std::string name, int in_c, int len, int out_c, int k, int stride,
         int pad, Rng& rng)
      : in_c_(in_c), len_(len), out_c_(out_c), k_(k), stride_(stride),
        pad_(pad), out_len_((len + 2 * pad - k) / stride + 1),
        K_(name + ".K", k * in_c, out_c), b_(name + ".b", out_c, 1) {
    init_he(K_, k * in_c, rng);
  }

  int out_len() const { return out_len_; }
  int out_dim() const { return out_len_ * out_c_; }
  int in_dim() const { return len_ * in_c_; }

  Mat<S> forward(const Mat<S>& x) {
    const Eigen::Index B = x.cols();
    const int R = k_ * in_c_;
    cols_.resize(static_cast<size_t>(B));
    Mat<S> y(out_dim(), B);
    for (Eigen::Index s = 0; s < B; ++s) {
      Mat<S>& col = cols_[static_cast<size_t>(s)];
      col.setZero(R, out_len_);
      const S* xs = x.col(s).data();
      for (int ot = 0; ot < out_len_; ++ot)
        for (int kk = 0; kk < k_; ++kk) {
          const int it = ot * stride_ + kk - pad_;
          if (it < 0 || it >= len_) continue;  // zero pad
          std::copy(xs + static_cast<std::ptrdiff_t>(it) * in_c_,
                    xs + static_cast<std::ptrdiff_t>(it + 1) * in_c_,
                    col.data() + (static_cast<std::ptrdiff_t>(ot) * R +
                                  kk * in_c_));
        }
      Eigen::Map<Mat<S>> out(y.col(s).data(), out_c_, out_len_);
      out.noalias() = K_.w.transpose() * col;
      out.colwise() += b_.w.col(0);
    }
    return y;
  }

  Mat<S> backward(const Mat<S>& gy) {
    const Eigen::Index B = gy.cols();
    Mat<S> gx = Mat<S>::Zero(in_dim(), B);
    for (Eigen::Index s = 0; s < B; ++s) {
      Eigen::Map<const Mat<S>> go(gy.col(s).data(), out_c_, out_len_);
      const Mat<S>& col = cols_[static_cast<size_t>(s)];
      K_.g.noalias() += col * go.transpose();
      b_.g.col(0).noalias() += go.rowwise().sum();
      Mat<S> gcol = K_.w * go;
      S* gxs = gx.col(s).data();
      for (int ot = 0; ot < out_len_; ++ot)
        for (int kk = 0; kk < k_; ++kk) {
          const int it = ot * stride_ + kk - pad_;
          if (it < 0 || it >= len_) continue;
          const S* src = gcol.data() +
                         (static_cast<std::ptrdiff_t>(ot) * gcol.rows() +
                          kk * in_c_);
          S* dst = gxs + static_cast<std::ptrdiff_t>(it) * in_c_;
          for (int c = 0; c < in_c_; ++c) dst[c] += src[c];
        }
    }
    return gx;
  }

  void collect(std::vector<Param<S>*>& ps) {
    ps.push_back(&K_);
    ps.push_back(&b_);
  }

 private:
  int in_c_ = 0, len_ = 0, out_c_ = 0, k_ = 0, stride_ = 0, pad_ = 0;
  int out_len_ = 0;
  Param<S> K_, b_;
  std::vector<Mat<S>> cols_;
};

// nearest-neighbour x2 upsample on interleaved (t*C + c) sequences
template <class S>
class Upsample1D {
 public:
  Upsample1D() = default;
  Upsample1D(int channels, int len) : c_(channels), len_(len) {}

  Mat<S> forward(const Mat<S>& x) {
    Mat<S> y(2 * len_ * c_, x.cols());
    for (Eigen::Index s = 0; s < x.cols(); ++s)
      for (int t = 0; t < len_; ++t)
        for (int c = 0; c < c_; ++c) {
          const S v = x(static_cast<Eigen::Index>(t) * c_ + c, s);
          y((2 * t) * c_ + c, s) = v;
          y((2 * t + 1) * c_ + c, s) = v;
        }
    return y;
  }

  Mat<S> backward(const Mat<S>& gy) {
    Mat<S> gx(len_ * c_, gy.cols());
    for (Eigen::Index s = 0; s < gy.cols(); ++s)
      for (int t = 0; t < len_; ++t)
        for (int c = 0; c < c_; ++c)
          gx(static_cast<Eigen::Index>(t) * c_ + c, s) =
              gy((2 * t) * c_ + c, s) + gy((2 * t + 1) * c_ + c, s);
    return gx;
  }

 private:
  int c_ = 0, len_ = 0;
};

}  // namespace dal::nn

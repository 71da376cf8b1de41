#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "dal/core/rng.hpp"

namespace dal::nn {

// Convention: activations are (features x batch); each column is one sample.
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Named trainable tensor with an accumulated gradient.
template <class S>
struct Param {
  std::string name;
  Mat<S> w;
  Mat<S> g;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), w(Mat<S>::Zero(rows, cols)),
        g(Mat<S>::Zero(rows, cols)) {}

  void zero_grad() { g.setZero(); }
  Eigen::Index size() const { return w.size(); }
};

// fan-in scaled uniform init (He for ReLU stacks, Xavier otherwise)
template <class S>
void init_uniform(Param<S>& p, double limit, Rng& rng) {
  for (Eigen::Index j = 0; j < p.w.cols(); ++j)
    for (Eigen::Index i = 0; i < p.w.rows(); ++i)
      p.w(i, j) = static_cast<S>(rng.uniform(-limit, limit));
}

template <class S>
void init_he(Param<S>& p, Eigen::Index fan_in, Rng& rng) {
  init_uniform(p, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

template <class S>
void init_xavier(Param<S>& p, Eigen::Index fan_in, Eigen::Index fan_out,
                 Rng& rng) {
  init_uniform(p, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

}  // namespace dal::nn

#pragma once

#include <utility>

#include "dal/nn/core.hpp"

namespace dal::nn {

// mean squared error over every element; returns loss and d(loss)/d(pred)
template <class S>
std::pair<S, Mat<S>> mse(const Mat<S>& pred, const Mat<S>& target) {
  const S n = static_cast<S>(pred.size());
  Mat<S> diff = pred - target;
  S loss = diff.squaredNorm() / n;
  Mat<S> g = (S(2) / n) * diff;
  return {loss, std::move(g)};
}

// binary cross entropy on probabilities in (0,1); logs are floored at 1e-8.
// Gradient is the exact (sub)gradient of the floored expression: zero where
// the floor is active.
template <class S>
std::pair<S, Mat<S>> bce(const Mat<S>& prob, const Mat<S>& target) {
  const S eps = static_cast<S>(1e-8);
  const S n = static_cast<S>(prob.size());
  S loss = 0;
  Mat<S> g = Mat<S>::Zero(prob.rows(), prob.cols());
  for (Eigen::Index j = 0; j < prob.cols(); ++j)
    for (Eigen::Index i = 0; i < prob.rows(); ++i) {
      const S p = prob(i, j);
      const S y = target(i, j);
      const S pc = std::max(p, eps);
      const S qc = std::max(S(1) - p, eps);
      loss -= y * std::log(pc) + (S(1) - y) * std::log(qc);
      S gi = 0;
      if (p > eps) gi -= y / pc;
      if (S(1) - p > eps) gi += (S(1) - y) / qc;
      g(i, j) = gi / n;
    }
  return {loss / n, std::move(g)};
}

}  // namespace dal::nn

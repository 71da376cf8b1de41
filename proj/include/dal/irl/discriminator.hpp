#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/core/rng.hpp"
#include "dal/nn/layers.hpp"
#include "dal/nn/optim.hpp"

namespace dal::irl {

// Adversarial loss over classifier probabilities D = P(expert | s, a):
//   L = -mean_policy[log(1 - D)] - mean_expert[log D]
// Each mean is over its own batch, so an ignorant D = 0.5 scores 2*ln 2.
// Logs are floored at 1e-8 with exact subgradients (zero where active).
// Returns the loss and the gradients wrt each probability matrix.
template <class S>
std::tuple<double, nn::Mat<S>, nn::Mat<S>> disc_loss(
    const nn::Mat<S>& p_policy, const nn::Mat<S>& p_expert) {
  const double eps = 1e-8;
  const double np = static_cast<double>(p_policy.size());
  const double ne = static_cast<double>(p_expert.size());
  double loss = 0.0;
  nn::Mat<S> gp = nn::Mat<S>::Zero(p_policy.rows(), p_policy.cols());
  nn::Mat<S> ge = nn::Mat<S>::Zero(p_expert.rows(), p_expert.cols());
  for (Eigen::Index j = 0; j < p_policy.cols(); ++j)
    for (Eigen::Index i = 0; i < p_policy.rows(); ++i) {
      const double q = 1.0 - static_cast<double>(p_policy(i, j));
      loss -= std::log(std::max(q, eps)) / np;
      if (q > eps) gp(i, j) = static_cast<S>(1.0 / (q * np));
    }
  for (Eigen::Index j = 0; j < p_expert.cols(); ++j)
    for (Eigen::Index i = 0; i < p_expert.rows(); ++i) {
      const double p = static_cast<double>(p_expert(i, j));
      loss -= std::log(std::max(p, eps)) / ne;
      if (p > eps) ge(i, j) = static_cast<S>(-1.0 / (p * ne));
    }
  return {loss, std::move(gp), std::move(ge)};
}

// survival-style reward from the classifier, clamped to a fixed band
inline double irl_reward(double d, const RunConfig::Irl& ic) {
  const double r = -std::log(1.0 - d + 1e-8);
  return std::clamp(r, ic.r_clip_min, ic.r_clip_max);
}

inline double hybrid_reward(double r_env, double r_irl,
                            const RunConfig::Irl& ic) {
  return ic.w_env * r_env + ic.w_irl * r_irl;
}

// MLP classifier over concat(state embedding, action). The embedding comes
// from a frozen feature snapshot, so reward queries are pure given a
// parameter snapshot: backward never reaches past the input.
template <class S>
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int embed_dim, Rng& rng)
      : dim_(embed_dim), h1_("disc.h1", embed_dim + 2, 128, rng),
        h2_("disc.h2", 128, 128, rng),
        out_("disc.out", 128, 1, rng, /*relu_fan=*/false) {}

  // probabilities, one column per (embedding, action) pair
  nn::Mat<S> forward(const nn::Mat<S>& emb, const nn::Mat<S>& act) {
    nn::Mat<S> x(dim_ + 2, emb.cols());
    x.topRows(dim_) = emb;
    x.bottomRows(2) = act;
    return sig_.forward(out_.forward(r2_.forward(h2_.forward(r1_.forward(h1_.forward(x))))));
  }

  void backward(const nn::Mat<S>& g_prob) {
    h1_.backward(r1_.backward(h2_.backward(r2_.backward(out_.backward(sig_.backward(g_prob))))));
  }

  double prob(const nn::Mat<S>& emb_col, float steering, float speed) {
    nn::Mat<S> a(2, 1);
    a(0, 0) = static_cast<S>(steering);
    a(1, 0) = static_cast<S>(speed);
    return static_cast<double>(forward(emb_col, a)(0, 0));
  }

  void collect(std::vector<nn::Param<S>*>& ps) {
    h1_.collect(ps);
    h2_.collect(ps);
    out_.collect(ps);
  }

  int embed_dim() const { return dim_; }

 private:
  int dim_ = 0;
  nn::Dense<S> h1_, h2_, out_;
  nn::ReLU<S> r1_, r2_;
  nn::Sigmoid<S> sig_;
};

// One optimizer step on a labeled batch pair; returns loss and accuracy at
// the 0.5 threshold. Both batches go through a single forward pass so the
// layer caches stay consistent for the backward.
template <class S>
std::pair<double, double> disc_train_step(
    Discriminator<S>& disc, nn::Adam<S>& opt, const nn::Mat<S>& emb_policy,
    const nn::Mat<S>& act_policy, const nn::Mat<S>& emb_expert,
    const nn::Mat<S>& act_expert, double grad_clip) {
  const Eigen::Index np = emb_policy.cols(), ne = emb_expert.cols();
  nn::Mat<S> emb(disc.embed_dim(), np + ne), act(2, np + ne);
  emb.leftCols(np) = emb_policy;
  emb.rightCols(ne) = emb_expert;
  act.leftCols(np) = act_policy;
  act.rightCols(ne) = act_expert;

  opt.zero_grad();
  const nn::Mat<S> p = disc.forward(emb, act);
  const nn::Mat<S> pp = p.leftCols(np);
  const nn::Mat<S> pe = p.rightCols(ne);
  auto [loss, gp, ge] = disc_loss(pp, pe);
  nn::Mat<S> g(1, np + ne);
  g.leftCols(np) = gp;
  g.rightCols(ne) = ge;
  disc.backward(g);
  nn::clip_global_norm(opt.params(), grad_clip);
  opt.step();

  int correct = 0;
  for (Eigen::Index j = 0; j < np; ++j)
    if (static_cast<double>(pp(0, j)) < 0.5) ++correct;
  for (Eigen::Index j = 0; j < ne; ++j)
    if (static_cast<double>(pe(0, j)) > 0.5) ++correct;
  const double acc = static_cast<double>(correct) / static_cast<double>(np + ne);
  return {loss, acc};
}

}  // namespace dal::irl

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/core/rng.hpp"
#include "dal/nn/losses.hpp"
#include "dal/nn/optim.hpp"
#include "dal/ppo/gae.hpp"
#include "dal/ppo/policy.hpp"

namespace dal::ppo {

// per-sample clipped surrogate objective (maximized)
inline double clipped_objective(double ratio, double adv, double clip) {
  const double c = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * adv, c * adv);
}

// Clipped-surrogate trainer over fixed-size on-policy windows. Embeddings are
// recorded at collection time and treated as constants: updates move the
// policy/value heads only, never the encoder that produced the embeddings.
template <class S>
class PpoTrainer {
 public:
  struct Stats {
    bool ran = false;      // a window was consumed
    bool aborted = false;  // non-finite loss: parameters were rolled back
    double policy_loss = 0.0, value_loss = 0.0, entropy = 0.0, kl = 0.0;
    double mean_reward = 0.0;
  };

  PpoTrainer() = default;
  PpoTrainer(const RunConfig::Ppo& pc, double grad_clip, int embed_dim,
             PolicyHead<S>* pi, ValueHead<S>* vf)
      : pc_(pc), grad_clip_(grad_clip), dim_(embed_dim), pi_(pi), vf_(vf) {
    pi_->collect(params_);
    vf_->collect(params_);
    opt_ = nn::Adam<S>(params_, pc_.lr);
    emb_.resize(dim_, pc_.window);
    u0_.resize(pc_.window);
    u1_.resize(pc_.window);
    logp_.resize(pc_.window);
    value_.resize(pc_.window);
    reward_.resize(pc_.window);
    done_.resize(pc_.window);
  }

  void push(const nn::Mat<S>& emb_col, const double u[2], double logp,
            double value, double reward, bool done) {
    emb_.col(n_) = emb_col.col(0);
    u0_[n_] = u[0];
    u1_[n_] = u[1];
    logp_[n_] = logp;
    value_[n_] = value;
    reward_[n_] = reward;
    done_[n_] = done ? 1 : 0;
    ++n_;
  }

  bool full() const { return n_ >= pc_.window; }
  int size() const { return n_; }
  void clear() { n_ = 0; }

  nn::Adam<S>& optimizer() { return opt_; }

  Stats update(double bootstrap_value, Rng& rng) {
    Stats st;
    if (n_ == 0) return st;
    st.ran = true;

    std::vector<double> rw(reward_.begin(), reward_.begin() + n_);
    std::vector<double> vl(value_.begin(), value_.begin() + n_);
    std::vector<char> dn(done_.begin(), done_.begin() + n_);
    auto [adv, ret] = gae(rw, vl, dn, bootstrap_value, pc_.gamma, pc_.gae_lambda);
    st.mean_reward = std::accumulate(rw.begin(), rw.end(), 0.0) / n_;

    double am = 0.0, a2 = 0.0;
    for (double a : adv) am += a;
    am /= n_;
    for (double a : adv) a2 += (a - am) * (a - am);
    const double astd = std::sqrt(a2 / n_) + 1e-8;
    for (double& a : adv) a = (a - am) / astd;

    // snapshot for rollback on numeric failure (weights + optimizer moments)
    std::vector<nn::Mat<S>> w0, m0, v0;
    for (auto* p : params_) w0.push_back(p->w);
    m0 = opt_.m();
    v0 = opt_.v();
    const std::int64_t t0 = opt_.steps();

    std::vector<int> idx(n_);
    std::iota(idx.begin(), idx.end(), 0);
    double pl_sum = 0.0, vl_sum = 0.0, kl_sum = 0.0;
    int mb_count = 0, kl_n = 0;
    bool bad = false;

    for (int epoch = 0; epoch < pc_.epochs && !bad; ++epoch) {
      for (int i = n_ - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
      const bool last_epoch = (epoch == pc_.epochs - 1);
      for (int start = 0; start < n_ && !bad; start += pc_.batch) {
        const int bsz = std::min(pc_.batch, n_ - start);
        nn::Mat<S> emb_mb(dim_, bsz);
        for (int j = 0; j < bsz; ++j) emb_mb.col(j) = emb_.col(idx[start + j]);

        opt_.zero_grad();
        const nn::Mat<S> mu = pi_->mean_forward(emb_mb);
        const double sg[2] = {pi_->sigma(0), pi_->sigma(1)};

        nn::Mat<S> g_mu = nn::Mat<S>::Zero(2, bsz);
        double g_ls[2] = {0.0, 0.0};
        double pol_loss = 0.0;
        for (int j = 0; j < bsz; ++j) {
          const int k = idx[start + j];
          const double u[2] = {u0_[k], u1_[k]};
          const double m[2] = {static_cast<double>(mu(0, j)),
                               static_cast<double>(mu(1, j))};
          const double lpn = squashed_logp(u, m, sg);
          const double ratio = std::exp(lpn - logp_[k]);
          const double a = adv[k];
          pol_loss -= clipped_objective(ratio, a, pc_.clip);
          const double c = std::clamp(ratio, 1.0 - pc_.clip, 1.0 + pc_.clip);
          // gradient flows only where the unclipped branch is selected
          const bool sel = ratio * a <= c * a;
          if (sel) {
            const double dlogp = -a * ratio / bsz;  // d(mean loss)/d logp_new
            for (int i = 0; i < 2; ++i) {
              const double z = (u[i] - m[i]) / sg[i];
              g_mu(i, j) = static_cast<S>(dlogp * z / sg[i]);
              g_ls[i] += dlogp * (z * z - 1.0);
            }
          }
          if (last_epoch) {
            kl_sum += logp_[k] - lpn;
            ++kl_n;
          }
        }
        pol_loss /= bsz;
        // entropy bonus enters the loss as -c2 * H(sigma)
        g_ls[0] -= pc_.entropy_coef;
        g_ls[1] -= pc_.entropy_coef;

        pi_->mean_backward(g_mu);
        pi_->log_std().g(0, 0) += static_cast<S>(g_ls[0]);
        pi_->log_std().g(1, 0) += static_cast<S>(g_ls[1]);

        nn::Mat<S> ret_mb(1, bsz);
        for (int j = 0; j < bsz; ++j)
          ret_mb(0, j) = static_cast<S>(ret[idx[start + j]]);
        const nn::Mat<S> v_pred = vf_->forward(emb_mb);
        auto [v_loss, g_v] = nn::mse(v_pred, ret_mb);
        vf_->backward(g_v * static_cast<S>(pc_.value_coef));

        if (!std::isfinite(pol_loss) || !std::isfinite(static_cast<double>(v_loss))) {
          bad = true;
          break;
        }
        nn::clip_global_norm(params_, grad_clip_);
        opt_.step();
        pi_->project_log_std();
        pl_sum += pol_loss;
        vl_sum += static_cast<double>(v_loss);
        ++mb_count;
      }
    }

    if (bad || !params_finite()) {
      for (size_t i = 0; i < params_.size(); ++i) params_[i]->w = w0[i];
      opt_.m() = m0;
      opt_.v() = v0;
      opt_.set_steps(t0);
      st.aborted = true;
    } else {
      st.policy_loss = mb_count ? pl_sum / mb_count : 0.0;
      st.value_loss = mb_count ? vl_sum / mb_count : 0.0;
      st.kl = kl_n ? kl_sum / kl_n : 0.0;
      st.entropy = pi_->entropy();
    }
    clear();
    return st;
  }

  // partial-window serialization for checkpoint/resume
  void save_window(std::ostream& os) const {
    const std::int32_t n = n_;
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (int i = 0; i < n_; ++i) {
      os.write(reinterpret_cast<const char*>(emb_.col(i).data()), dim_ * sizeof(S));
      const double d[5] = {u0_[i], u1_[i], logp_[i], value_[i], reward_[i]};
      os.write(reinterpret_cast<const char*>(d), sizeof d);
      os.write(reinterpret_cast<const char*>(&done_[i]), 1);
    }
  }

  void load_window(std::istream& is) {
    std::int32_t n = 0;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    n_ = n;
    for (int i = 0; i < n_; ++i) {
      is.read(reinterpret_cast<char*>(emb_.col(i).data()), dim_ * sizeof(S));
      double d[5];
      is.read(reinterpret_cast<char*>(d), sizeof d);
      u0_[i] = d[0];
      u1_[i] = d[1];
      logp_[i] = d[2];
      value_[i] = d[3];
      reward_[i] = d[4];
      is.read(reinterpret_cast<char*>(&done_[i]), 1);
    }
  }

 private:
  bool params_finite() const {
    for (const auto* p : params_)
      if (!p->w.allFinite()) return false;
    return true;
  }

  RunConfig::Ppo pc_;
  double grad_clip_ = 0.5;
  int dim_ = 0;
  PolicyHead<S>* pi_ = nullptr;
  ValueHead<S>* vf_ = nullptr;
  std::vector<nn::Param<S>*> params_;
  nn::Adam<S> opt_;
  nn::Mat<S> emb_;
  std::vector<double> u0_, u1_, logp_, value_, reward_;
  std::vector<char> done_;
  int n_ = 0;
};

}  // namespace dal::ppo

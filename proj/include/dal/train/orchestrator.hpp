#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/core/io.hpp"
#include "dal/core/rng.hpp"
#include "dal/diffusion/planner.hpp"
#include "dal/expert/fsm.hpp"
#include "dal/expert/replay.hpp"
#include "dal/irl/discriminator.hpp"
#include "dal/nn/optim.hpp"
#include "dal/perception/encoder.hpp"
#include "dal/ppo/policy.hpp"
#include "dal/ppo/ppo.hpp"
#include "dal/sim/env.hpp"
#include "dal/train/metrics.hpp"
#include "dal/train/variant.hpp"

namespace dal::train {

// Per-step record of the action pipeline, kept for invariant checks.
struct StepAudit {
  long step = 0;
  float r_env = 0.0f, r_irl = 0.0f, reward = 0.0f;
  bool triggered = false;
  sim::Action a_policy, a_exec, a_learn, a_expert;
};

struct TrainCounts {
  long bc_rounds = 0;
  long ddpm_rounds = 0, ddpm_skipped = 0;
  long disc_rounds = 0, disc_skipped = 0;
  long sync_rounds = 0;  // scheduled feature snapshots (phase boundary extra)
  long ppo_updates = 0, ppo_aborts = 0;
  long interventions = 0, mixed_steps = 0;
  long episodes = 0, collisions = 0, successes = 0;
};

// Two-phase training driver: a scripted-demonstration phase feeding
// regression and denoiser updates, then a mixed phase where the stochastic
// policy drives under the safety shield while reward shaping, the
// discriminator and advantage-based updates run on their own cadences.
class Orchestrator {
 public:
  Orchestrator(const RunConfig& cfg, const Variant& var, std::uint64_t seed,
               std::filesystem::path out_dir);

  // advance training until the global step counter reaches `until`
  void run_steps(long until);
  void run_all() { run_steps(total_steps()); }

  // final artifacts: dataset trace, evaluation, metrics tables, checkpoint
  RunMetrics finish();

  // deterministic-policy evaluation with the variant's shield behaviour
  RunMetrics evaluate(int episodes, std::uint64_t eval_seed,
                      std::vector<EpisodeStats>* per_episode = nullptr);

  void save_checkpoint(const std::filesystem::path& dir,
                       bool with_runtime) const;
  void load_checkpoint(const std::filesystem::path& dir);

  // regression loss of the current deterministic policy on the held-out set
  double heldout_loss();

  long step() const { return step_; }
  long total_steps() const { return n_im_ + cfg_.schedule.n_mixed; }
  long imitation_steps() const { return n_im_; }
  bool complete() const { return step_ >= total_steps(); }
  const RunConfig& config() const { return cfg_; }
  const Variant& variant() const { return var_; }
  std::uint64_t seed() const { return seed_; }

  const TrainCounts& counts() const { return counts_; }
  const std::deque<StepAudit>& audit() const { return audit_; }
  expert::ReplayBuffer& buffer() { return buffer_; }
  perception::Encoder<float>& encoder() { return encoder_; }
  perception::Encoder<float>& reward_encoder() { return frozen_; }
  ppo::PolicyHead<float>& policy() { return policy_; }
  ppo::ValueHead<float>& value() { return value_; }
  irl::Discriminator<float>& discriminator() { return disc_; }
  diffusion::DiffusionPlanner<float>& planner() { return planner_; }
  double shield_authority() const { return prev_w_; }

 private:
  void begin_episode();
  void end_episode(const sim::StepInfo& info);
  void step_imitation();
  void step_mixed();
  void run_cadences();  // fires training rounds owed after the current step
  void bc_round(int minibatches);
  void ddpm_round();
  void disc_round();
  void sync_features();
  void push_chunk_frame(const sim::Action& a, const sim::StepInfo& pre);
  diffusion::EnergyContext energy_context(const sim::StepInfo& pre) const;
  void ensure_heldout();
  void log_row();
  void open_logs();

  RunConfig cfg_;
  Variant var_;
  std::uint64_t seed_;
  std::filesystem::path out_;
  std::uint64_t cfg_hash_;
  long n_im_, step_ = 0;

  sim::DrivingEnv env_;
  expert::FsmExpert fsm_;
  sim::ObsPtr obs_;
  sim::Action last_act_{0.0f, 0.0f};
  bool episode_open_ = false;

  expert::ReplayBuffer buffer_;
  perception::Encoder<float> encoder_;
  perception::Encoder<float> frozen_;  // reward-feature snapshot
  ppo::PolicyHead<float> policy_;
  ppo::ValueHead<float> value_;
  ppo::PpoTrainer<float> ppo_;
  irl::Discriminator<float> disc_;
  nn::Adam<float> disc_opt_;
  diffusion::DiffusionPlanner<float> planner_;
  nn::Adam<float> bc_opt_;
  nn::PlateauScheduler bc_sched_;

  Rng rng_env_, rng_bc_, rng_disc_, rng_ddpm_, rng_act_, rng_shuffle_,
      rng_dal_;

  double prev_w_ = 0.0;  // shield authority EMA state

  // sliding window assembling overlapping action chunks within an episode
  std::deque<std::pair<Eigen::Vector2f, Eigen::VectorXf>> chunk_win_;

  std::vector<sim::ObsPtr> held_obs_;
  std::vector<sim::Action> held_act_;

  TrainCounts counts_;
  std::deque<StepAudit> audit_;

  // latest training statistics (reported in the periodic log row)
  double last_bc_ = 0.0, last_heldout_ = 0.0, last_ddpm_ = 0.0;
  double last_disc_ = 0.0, last_disc_acc_ = 0.0;
  double last_ppo_r_ = 0.0, last_pi_loss_ = 0.0, last_vf_loss_ = 0.0;
  double last_entropy_ = 0.0, last_kl_ = 0.0;

  // rolling accumulators for the per-interval log row
  double win_r_ = 0.0;
  long win_n_ = 0, win_trig_ = 0, win_shield_eligible_ = 0;

  std::unique_ptr<CsvWriter> train_csv_;
  std::unique_ptr<CsvWriter> interv_csv_;
};

// Scalar trace of every stored transition, partition-major in storage
// order; action fields are printed with full float round-trip precision.
void export_dataset_csv(const expert::ReplayBuffer& buf,
                        const std::filesystem::path& path,
                        std::uint64_t config_hash, std::uint64_t seed);

}  // namespace dal::train

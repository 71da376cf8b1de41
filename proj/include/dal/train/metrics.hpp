#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/expert/fsm.hpp"
#include "dal/sim/env.hpp"

namespace dal::train {

struct EpisodeStats {
  std::uint64_t seed = 0;
  int steps = 0;
  bool collision = false;
  bool success = false;
  double return_env = 0.0;
  double similarity_pct = 0.0;
  double ade = 0.0, fde = 0.0;
  int states_mask = 0;  // bit per expert mode the shadow controller visited
  int interventions = 0;
};

struct RunMetrics {
  double mean_reward_norm = 0.0;       // anchored: random -> 0, expert -> 200
  double collisions_per_1k = 0.0;
  double success_pct = 0.0;
  double bc_loss = 0.0;                // regression error vs fresh expert pairs
  double action_similarity_pct = 0.0;  // steps with sup-norm gap < 0.1
  double ade_m = 0.0, fde_m = 0.0;     // displacement vs expert reference path
  double raw_return_mean = 0.0;
  double anchor_random = 0.0, anchor_expert = 0.0;
  double intervention_rate = 0.0;
  long total_steps = 0;
  int episodes = 0, collisions = 0, successes = 0;
};

// Deterministic policy under evaluation. `reset` runs before each episode;
// `act` may flag a shield intervention through the out-parameter.
struct EvalActor {
  bool needs_obs = true;  // false skips rendering (privileged controllers)
  std::function<void(std::uint64_t)> reset;
  std::function<sim::Action(sim::DrivingEnv&, const sim::ObsPtr&, bool*)> act;
};

// canonical deterministic seed of the e-th evaluation episode
std::uint64_t episode_seed(std::uint64_t base, int episode);

// Seeded evaluation protocol: per episode, reward anchors are measured with
// a random policy and the privileged expert on the same layout, then the
// actor drives it with a shadow expert scoring action similarity and a
// cloned-state expert rollout providing the ADE/FDE reference path.
RunMetrics evaluate_policy(const RunConfig& cfg, std::uint64_t seed,
                           int episodes, EvalActor& actor,
                           std::vector<EpisodeStats>* per_episode = nullptr);

// Mean squared action error of a policy against freshly collected expert
// behaviour (samples drawn by driving the expert on held-out layouts).
double expert_regression_loss(
    const RunConfig& cfg, std::uint64_t seed, int samples,
    const std::function<sim::Action(const sim::ObsPtr&)>& policy_action);

// pseudo-checkpoint: the privileged expert evaluated as if it were a policy
EvalActor make_expert_actor(const RunConfig& cfg);

}  // namespace dal::train

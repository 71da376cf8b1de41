#include "dal/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "dal/core/rng.hpp"

namespace dal::train {

std::uint64_t episode_seed(std::uint64_t base, int episode) {
  return splitmix64(base ^ (0x9e3779b97f4a7c15ull *
                            static_cast<std::uint64_t>(episode)));
}

namespace {

sim::Scenario scenario_of(const RunConfig& cfg) {
  return cfg.sim.scenario == "default" ? sim::Scenario::from_config(cfg.sim)
                                       : sim::Scenario::load(cfg.sim.scenario, cfg.sim);
}

double episode_return_random(sim::DrivingEnv& env, std::uint64_t seed, Rng& rng) {
  env.reset(seed);
  double r = 0.0;
  while (!env.done()) {
    sim::Action a;
    a.steering = static_cast<float>(rng.uniform(-1.0, 1.0));
    a.speed = static_cast<float>(rng.uniform(0.0, 1.0));
    r += env.step_physics(a).r_env;
  }
  return r;
}

double episode_return_expert(sim::DrivingEnv& env, std::uint64_t seed,
                             const RunConfig::Expert& ec) {
  env.reset(seed);
  expert::FsmExpert fx(ec);
  fx.reset();
  double r = 0.0;
  while (!env.done()) r += env.step_physics(fx.act(env)).r_env;
  return r;
}

}  // namespace

RunMetrics evaluate_policy(const RunConfig& cfg, std::uint64_t seed,
                           int episodes, EvalActor& actor,
                           std::vector<EpisodeStats>* per_episode) {
  if (episodes <= 0) throw ConfigError("evaluation needs at least one episode");
  sim::DrivingEnv env(cfg.sim, scenario_of(cfg));
  RunMetrics m;
  m.episodes = episodes;

  Rng rng_random(seed, "metrics.random");
  double sum_rand = 0.0, sum_exp = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t es = episode_seed(seed, e);
    sum_rand += episode_return_random(env, es, rng_random);
    sum_exp += episode_return_expert(env, es, cfg.expert);
  }
  m.anchor_random = sum_rand / episodes;
  m.anchor_expert = sum_exp / episodes;

  double sum_ret = 0.0, sum_sim = 0.0, sum_ade = 0.0, sum_fde = 0.0;
  long interventions = 0;
  for (int e = 0; e < episodes; ++e) {
    EpisodeStats ep;
    ep.seed = episode_seed(seed, e);
    sim::ObsPtr obs = env.reset(ep.seed);
    if (actor.reset) actor.reset(ep.seed);

    // expert reference path from the identical initial state
    std::vector<std::pair<double, double>> ref;
    {
      sim::DrivingEnv ref_env = env.clone_physics();
      expert::FsmExpert rfx(cfg.expert);
      rfx.reset();
      for (int t = 0; t < cfg.eval.ade_horizon && !ref_env.done(); ++t) {
        ref_env.step_physics(rfx.act(ref_env));
        ref.emplace_back(ref_env.vehicle().x, ref_env.vehicle().y);
      }
    }

    expert::FsmExpert shadow(cfg.expert);
    shadow.reset();
    std::vector<std::pair<double, double>> traj;
    int sim_hits = 0;
    while (!env.done()) {
      const sim::Action a_ref = shadow.act(env);
      ep.states_mask |= 1 << static_cast<int>(shadow.state());
      bool intervened = false;
      const sim::Action a = actor.act(env, obs, &intervened);
      if (intervened) ++ep.interventions;
      if (std::max(std::abs(a.steering - a_ref.steering),
                   std::abs(a.speed - a_ref.speed)) < 0.1)
        ++sim_hits;
      sim::StepInfo info;
      if (actor.needs_obs) {
        sim::StepResult res = env.step(a);
        obs = res.obs;
        info = res.info;
      } else {
        info = env.step_physics(a);
      }
      if (static_cast<int>(traj.size()) < cfg.eval.ade_horizon)
        traj.emplace_back(env.vehicle().x, env.vehicle().y);
      ep.return_env += info.r_env;
      ++ep.steps;
      if (info.done) {
        ep.collision = info.collision;
        ep.success = info.success;
      }
    }

    const size_t h = std::min(ref.size(), traj.size());
    if (h > 0) {
      double acc = 0.0, last = 0.0;
      for (size_t t = 0; t < h; ++t) {
        last = std::hypot(traj[t].first - ref[t].first,
                          traj[t].second - ref[t].second);
        acc += last;
      }
      ep.ade = acc / static_cast<double>(h);
      ep.fde = last;
    }
    ep.similarity_pct = ep.steps ? 100.0 * sim_hits / ep.steps : 0.0;

    m.total_steps += ep.steps;
    m.collisions += ep.collision ? 1 : 0;
    m.successes += ep.success ? 1 : 0;
    interventions += ep.interventions;
    sum_ret += ep.return_env;
    sum_sim += ep.similarity_pct;
    sum_ade += ep.ade;
    sum_fde += ep.fde;
    if (per_episode) per_episode->push_back(ep);
  }

  m.raw_return_mean = sum_ret / episodes;
  m.action_similarity_pct = sum_sim / episodes;
  m.ade_m = sum_ade / episodes;
  m.fde_m = sum_fde / episodes;
  m.collisions_per_1k =
      m.total_steps ? 1000.0 * m.collisions / static_cast<double>(m.total_steps) : 0.0;
  m.success_pct = 100.0 * m.successes / episodes;
  m.intervention_rate =
      m.total_steps ? static_cast<double>(interventions) / static_cast<double>(m.total_steps) : 0.0;
  const double span = m.anchor_expert - m.anchor_random;
  m.mean_reward_norm =
      span > 1e-9
          ? std::clamp(200.0 * (m.raw_return_mean - m.anchor_random) / span, 0.0, 200.0)
          : 0.0;
  return m;
}

double expert_regression_loss(
    const RunConfig& cfg, std::uint64_t seed, int samples,
    const std::function<sim::Action(const sim::ObsPtr&)>& policy_action) {
  sim::DrivingEnv env(cfg.sim, scenario_of(cfg));
  expert::FsmExpert fx(cfg.expert);
  Rng seeds(seed, "metrics.heldout");
  double acc = 0.0;
  int n = 0;
  while (n < samples) {
    sim::ObsPtr obs = env.reset(seeds.u64());
    fx.reset();
    while (!env.done() && n < samples) {
      const sim::Action a_star = fx.act(env);
      const sim::Action a = policy_action(obs);
      const double ds = a.steering - a_star.steering;
      const double dv = a.speed - a_star.speed;
      acc += ds * ds + dv * dv;
      ++n;
      obs = env.step(a_star).obs;
    }
  }
  return acc / (2.0 * samples);  // per element, matching the trainer's loss
}

EvalActor make_expert_actor(const RunConfig& cfg) {
  auto fx = std::make_shared<expert::FsmExpert>(cfg.expert);
  EvalActor a;
  a.needs_obs = false;
  a.reset = [fx](std::uint64_t) { fx->reset(); };
  a.act = [fx](sim::DrivingEnv& env, const sim::ObsPtr&, bool*) {
    return fx->act(env);
  };
  return a;
}

}  // namespace dal::train

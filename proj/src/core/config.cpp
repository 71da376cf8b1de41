#include "dal/core/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "dal/core/errors.hpp"
#include "dal/core/rng.hpp"

namespace dal {
namespace {

struct Field {
  std::string key;  // "section.name"
  enum Kind { kInt, kDouble, kString } kind;
  void* ptr;
};

// One registry drives dump, parse and hashing, so the three can never
// disagree about what a config contains.
std::vector<Field> registry(RunConfig& c) {
  std::vector<Field> f;
  auto I = [&](const char* k, int& v) { f.push_back({k, Field::kInt, &v}); };
  auto D = [&](const char* k, double& v) {
    f.push_back({k, Field::kDouble, &v});
  };
  auto S = [&](const char* k, std::string& v) {
    f.push_back({k, Field::kString, &v});
  };

  D("sim.dt", c.sim.dt);
  D("sim.wheelbase", c.sim.wheelbase);
  D("sim.v_max", c.sim.v_max);
  D("sim.delta_max", c.sim.delta_max);
  D("sim.speed_tau", c.sim.speed_tau);
  I("sim.lidar_beams", c.sim.lidar_beams);
  D("sim.lidar_range", c.sim.lidar_range);
  I("sim.image_size", c.sim.image_size);
  D("sim.px_per_m", c.sim.px_per_m);
  D("sim.d_collision", c.sim.d_collision);
  D("sim.d_safe", c.sim.d_safe);
  D("sim.lane_width", c.sim.lane_width);
  I("sim.num_lanes", c.sim.num_lanes);
  I("sim.max_episode_steps", c.sim.max_episode_steps);
  D("sim.goal_margin", c.sim.goal_margin);
  D("sim.track_straight_len", c.sim.track_straight_len);
  D("sim.track_arc_radius", c.sim.track_arc_radius);
  I("sim.static_obstacles", c.sim.static_obstacles);
  I("sim.moving_obstacles", c.sim.moving_obstacles);
  D("sim.obstacle_r_min", c.sim.obstacle_r_min);
  D("sim.obstacle_r_max", c.sim.obstacle_r_max);
  D("sim.obstacle_lat_jitter", c.sim.obstacle_lat_jitter);
  D("sim.mover_speed_min", c.sim.mover_speed_min);
  D("sim.mover_speed_max", c.sim.mover_speed_max);
  D("sim.obstacle_s_min", c.sim.obstacle_s_min);
  D("sim.obstacle_min_gap", c.sim.obstacle_min_gap);
  S("sim.scenario", c.sim.scenario);

  D("expert.kp", c.expert.kp);
  D("expert.kd", c.expert.kd);
  D("expert.cruise_cmd", c.expert.cruise_cmd);
  D("expert.avoid_cmd", c.expert.avoid_cmd);
  D("expert.action_delta_cap", c.expert.action_delta_cap);
  D("expert.cone_half_angle_deg", c.expert.cone_half_angle_deg);
  D("expert.d_avoid", c.expert.d_avoid);
  D("expert.d_react", c.expert.d_react);
  D("expert.p_cap_frac", c.expert.p_cap_frac);
  D("expert.ref_rate", c.expert.ref_rate);
  D("expert.lateral_clearance", c.expert.lateral_clearance);
  D("expert.return_tol", c.expert.return_tol);
  D("expert.return_heading_tol", c.expert.return_heading_tol);
  D("expert.return_lookahead", c.expert.return_lookahead);
  D("expert.edge_margin", c.expert.edge_margin);
  D("expert.in_path_margin", c.expert.in_path_margin);
  D("expert.abeam_enter", c.expert.abeam_enter);
  D("expert.behind_margin", c.expert.behind_margin);

  I("replay.capacity", c.replay.capacity);

  D("bc.lr", c.bc.lr);
  I("bc.batch", c.bc.batch);
  I("bc.minibatches_initial", c.bc.minibatches_initial);
  I("bc.minibatches_mixed", c.bc.minibatches_mixed);
  D("bc.l2", c.bc.l2);
  I("bc.plateau_patience", c.bc.plateau_patience);
  D("bc.plateau_eps", c.bc.plateau_eps);
  D("bc.lr_floor", c.bc.lr_floor);

  D("lam.alpha_init", c.lam.alpha_init);

  D("ppo.gamma", c.ppo.gamma);
  D("ppo.gae_lambda", c.ppo.gae_lambda);
  D("ppo.clip", c.ppo.clip);
  I("ppo.epochs", c.ppo.epochs);
  I("ppo.batch", c.ppo.batch);
  I("ppo.window", c.ppo.window);
  D("ppo.lr", c.ppo.lr);
  D("ppo.value_coef", c.ppo.value_coef);
  D("ppo.entropy_coef", c.ppo.entropy_coef);
  D("ppo.log_std_init", c.ppo.log_std_init);
  D("ppo.log_std_min", c.ppo.log_std_min);
  D("ppo.log_std_max", c.ppo.log_std_max);

  D("irl.w_env", c.irl.w_env);
  D("irl.w_irl", c.irl.w_irl);
  D("irl.lr", c.irl.lr);
  D("irl.r_clip_min", c.irl.r_clip_min);
  D("irl.r_clip_max", c.irl.r_clip_max);
  I("irl.disc_interval", c.irl.disc_interval);
  I("irl.sync_interval", c.irl.sync_interval);
  I("irl.disc_minibatches", c.irl.disc_minibatches);
  I("irl.disc_batch", c.irl.disc_batch);

  I("diffusion.steps", c.diffusion.steps);
  I("diffusion.horizon", c.diffusion.horizon);
  D("diffusion.beta_min", c.diffusion.beta_min);
  D("diffusion.beta_max", c.diffusion.beta_max);
  D("diffusion.lr", c.diffusion.lr);
  I("diffusion.batch", c.diffusion.batch);
  I("diffusion.minibatches", c.diffusion.minibatches);
  I("diffusion.chunk_capacity", c.diffusion.chunk_capacity);
  D("diffusion.guidance_weight", c.diffusion.guidance_weight);

  D("energy.w_jerk", c.energy.w_jerk);
  D("energy.w_stab", c.energy.w_stab);
  D("energy.w_expert", c.energy.w_expert);
  D("energy.s_lane", c.energy.s_lane);
  D("energy.s_lidar", c.energy.s_lidar);
  D("energy.w_base_lane", c.energy.w_base_lane);
  D("energy.w_base_lidar", c.energy.w_base_lidar);
  D("energy.alpha_hazard", c.energy.alpha_hazard);
  D("energy.d_safe_plan", c.energy.d_safe_plan);
  D("energy.v_ref", c.energy.v_ref);

  D("dal.d_trigger", c.dal.d_trigger);
  D("dal.e_lane_px", c.dal.e_lane_px);
  D("dal.d_critical", c.dal.d_critical);
  D("dal.w_base_blend", c.dal.w_base_blend);
  D("dal.w_scale_blend", c.dal.w_scale_blend);
  D("dal.ema", c.dal.ema);
  D("dal.hazard_scale", c.dal.hazard_scale);
  D("dal.blend_d_scale", c.dal.blend_d_scale);
  D("dal.blend_px_scale", c.dal.blend_px_scale);
  D("dal.blend_px_coeff", c.dal.blend_px_coeff);

  I("schedule.n_imitation", c.schedule.n_imitation);
  I("schedule.n_mixed", c.schedule.n_mixed);
  I("schedule.t_bc_initial", c.schedule.t_bc_initial);
  I("schedule.t_bc_mixed", c.schedule.t_bc_mixed);
  I("schedule.t_diffusion", c.schedule.t_diffusion);
  I("schedule.checkpoint_every", c.schedule.checkpoint_every);

  D("train.grad_clip", c.train.grad_clip);

  I("eval.episodes", c.eval.episodes);
  I("eval.ade_horizon", c.eval.ade_horizon);
  return f;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string RunConfig::dump() const {
  RunConfig copy = *this;
  std::ostringstream os;
  std::string section;
  for (const Field& f : registry(copy)) {
    const size_t dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    const std::string name = f.key.substr(dot + 1);
    if (sec != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sec << "]\n";
      section = sec;
    }
    os << name << " = ";
    switch (f.kind) {
      case Field::kInt: os << *static_cast<int*>(f.ptr); break;
      case Field::kDouble: os << format_double(*static_cast<double*>(f.ptr)); break;
      case Field::kString: os << *static_cast<std::string*>(f.ptr); break;
    }
    os << "\n";
  }
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(dump()); }

void RunConfig::apply_text(const std::string& text) {
  std::vector<Field> fields = registry(*this);
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hashpos = line.find('#');
    if (hashpos != std::string::npos) line.erase(hashpos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    Field* hit = nullptr;
    for (Field& f : fields)
      if (f.key == key) {
        hit = &f;
        break;
      }
    if (!hit) throw ConfigError("unknown config key: " + key);
    try {
      switch (hit->kind) {
        case Field::kInt: {
          size_t used = 0;
          const int v = std::stoi(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
          *static_cast<int*>(hit->ptr) = v;
          break;
        }
        case Field::kDouble: {
          size_t used = 0;
          const double v = std::stod(value, &used);
          if (used != value.size() || !std::isfinite(v))
            throw std::invalid_argument(value);
          *static_cast<double*>(hit->ptr) = v;
          break;
        }
        case Field::kString:
          *static_cast<std::string*>(hit->ptr) = value;
          break;
      }
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": bad value '" + value + "'");
    }
  }
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  apply_text(buf.str());
}

void RunConfig::override_steps(int total_steps) {
  if (total_steps <= 0) throw ConfigError("steps override must be positive");
  const double total =
      static_cast<double>(schedule.n_imitation + schedule.n_mixed);
  const double frac = schedule.n_imitation / total;
  schedule.n_imitation =
      static_cast<int>(std::lround(total_steps * frac));
  schedule.n_mixed = total_steps - schedule.n_imitation;
}

}  // namespace dal

#pragma once

#include <cstdint>
#include <string>

namespace dal {

// Every tunable of the pipeline, grouped by module. Serialized as flat
// `key = value` text with one [section] per group; unknown keys are
// rejected on load so config typos cannot silently fall back to defaults.
struct RunConfig {
  struct Sim {
    double dt = 0.1;
    double wheelbase = 2.5;
    double v_max = 10.0;
    double delta_max = 0.5;
    double speed_tau = 0.5;
    int lidar_beams = 180;
    double lidar_range = 10.0;
    int image_size = 64;
    double px_per_m = 40.0;  // metric <-> pixel bridge for lane offset
    double d_collision = 1.0;
    double d_safe = 3.0;
    double lane_width = 3.5;
    int num_lanes = 2;
    int max_episode_steps = 1200;
    double goal_margin = 5.0;
    double track_straight_len = 60.0;
    double track_arc_radius = 25.0;
    int static_obstacles = 6;
    int moving_obstacles = 2;
    double obstacle_r_min = 0.35;
    double obstacle_r_max = 0.6;
    double obstacle_lat_jitter = 0.6;
    double mover_speed_min = 0.4;
    double mover_speed_max = 0.9;
    double obstacle_s_min = 50.0;
    double obstacle_min_gap = 25.0;
    std::string scenario = "default";  // "default" or a scenario file path
  } sim;

  struct Expert {
    double kp = 0.8;
    double kd = 0.3;
    double cruise_cmd = 0.6;
    double avoid_cmd = 0.35;
    double action_delta_cap = 0.15;
    double cone_half_angle_deg = 25.0;
    double d_avoid = 3.0;   // unconditional cone-test range
    double d_react = 12.0;  // earlier entry for path-blocking obstacles
    double p_cap_frac = 0.55;  // P-term bound as fraction of D authority
    double ref_rate = 2.0;    // m/s slew of the lateral reference
    double lateral_clearance = 2.0;
    double return_tol = 0.2;
    double return_heading_tol = 0.2;
    double return_lookahead = 8.0;  // extra scan range before diving back
    double edge_margin = 0.65;
    double in_path_margin = 1.0;  // lateral slack counted as blocking
    double abeam_enter = 1.0;     // forward gap that counts as "beside"
    double behind_margin = 1.0;   // clearance behind before returning
  } expert;

  struct Replay {
    int capacity = 50000;
  } replay;

  struct Bc {
    double lr = 3e-4;
    int batch = 32;
    int minibatches_initial = 15;
    int minibatches_mixed = 8;
    double l2 = 1e-6;
    int plateau_patience = 5;
    double plateau_eps = 1e-4;
    double lr_floor = 1e-6;
  } bc;

  struct Lam {
    double alpha_init = 0.5;
  } lam;

  struct Ppo {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip = 0.2;
    int epochs = 10;
    int batch = 64;
    int window = 2048;
    double lr = 3e-4;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    double log_std_init = -0.7;
    double log_std_min = -5.0;
    double log_std_max = 1.0;
  } ppo;

  struct Irl {
    double w_env = 0.7;
    double w_irl = 0.3;
    double lr = 3e-4;
    double r_clip_min = 0.0;
    double r_clip_max = 5.0;
    int disc_interval = 2000;
    int sync_interval = 1000;
    int disc_minibatches = 8;
    int disc_batch = 64;
  } irl;

  struct Diffusion {
    int steps = 100;
    int horizon = 8;
    double beta_min = 1e-4;
    double beta_max = 0.02;
    double lr = 3e-4;
    int batch = 32;
    int minibatches = 15;
    int chunk_capacity = 20000;
    double guidance_weight = 0.1;
  } diffusion;

  struct Energy {
    double w_jerk = 0.1;
    double w_stab = 0.5;
    double w_expert = 2.0;
    double s_lane = 0.5;
    double s_lidar = 2.0;
    double w_base_lane = 1.0;
    double w_base_lidar = 1.0;
    double alpha_hazard = 1.0;
    double d_safe_plan = 3.0;
    double v_ref = 0.5;
  } energy;

  struct Dal {
    double d_trigger = 3.0;
    double e_lane_px = 120.0;
    double d_critical = 1.5;
    double w_base_blend = 0.3;
    double w_scale_blend = 0.7;
    double ema = 0.8;
    double hazard_scale = 3.0;    // s_h in the tanh hazard
    double blend_d_scale = 2.0;   // metres, exp term of the raw blend
    double blend_px_scale = 20.0; // pixels, tanh term of the raw blend
    double blend_px_coeff = 0.3;
  } dal;

  struct Schedule {
    int n_imitation = 20000;
    int n_mixed = 30000;
    int t_bc_initial = 1000;
    int t_bc_mixed = 500;
    int t_diffusion = 500;
    int checkpoint_every = 0;  // 0 = final checkpoint only
  } schedule;

  struct Train {
    double grad_clip = 0.5;  // global-norm clip shared by every trainer
  } train;

  struct Eval {
    int episodes = 20;
    int ade_horizon = 40;
  } eval;

  // canonical text form (also the hash input)
  std::string dump() const;
  std::uint64_t hash() const;

  // strict parse: throws ConfigError on unknown key / bad value
  void apply_text(const std::string& text);
  void apply_file(const std::string& path);

  // proportional rescale of the two phase lengths to a new total
  void override_steps(int total_steps);
};

}  // namespace dal

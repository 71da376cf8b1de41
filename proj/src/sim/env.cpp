#include "dal/sim/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dal/core/errors.hpp"
#include "dal/core/io.hpp"
#include "dal/sim/camera.hpp"
#include "dal/sim/lidar.hpp"

namespace dal::sim {
namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}

double clampd(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}
}  // namespace

Scenario Scenario::from_config(const RunConfig::Sim& cfg) {
  if (cfg.scenario != "default") return load(cfg.scenario, cfg);
  Scenario sc;
  sc.track = Track::default_track(cfg.track_straight_len, cfg.track_arc_radius,
                                  cfg.lane_width, cfg.num_lanes);
  sc.random_static = cfg.static_obstacles;
  sc.random_movers = cfg.moving_obstacles;
  return sc;
}

Scenario Scenario::parse(const std::string& text, const RunConfig::Sim& cfg) {
  Scenario sc;
  std::vector<TrackSegment> segs;
  double lane_width = cfg.lane_width;
  int num_lanes = cfg.num_lanes;
  sc.random_static = 0;
  sc.random_movers = 0;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hashpos = line.find('#');
    if (hashpos != std::string::npos) line.erase(hashpos);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    if (!(ls >> eq) || eq != "=")
      throw ConfigError("scenario line " + std::to_string(lineno) +
                        ": expected key = value");
    if (key == "lane_width") {
      ls >> lane_width;
    } else if (key == "num_lanes") {
      ls >> num_lanes;
    } else if (key == "random_static") {
      ls >> sc.random_static;
    } else if (key == "random_movers") {
      ls >> sc.random_movers;
    } else if (key == "segment") {
      std::string kind;
      ls >> kind;
      TrackSegment seg;
      if (kind == "straight") {
        ls >> seg.length;
      } else if (kind == "arc") {
        double deg = 0;
        ls >> seg.radius >> deg;
        seg.is_arc = true;
        seg.turn = deg * kPi / 180.0;
        seg.length = seg.radius * std::abs(seg.turn);
      } else {
        throw ConfigError("scenario line " + std::to_string(lineno) +
                          ": unknown segment kind '" + kind + "'");
      }
      segs.push_back(seg);
    } else if (key == "obstacle") {
      std::string kind;
      ls >> kind;
      FixedObstacle ob;
      if (kind == "static") {
        ls >> ob.s >> ob.lateral >> ob.radius;
      } else if (kind == "mover") {
        ls >> ob.s >> ob.lateral >> ob.radius >> ob.speed;
        ob.mover = true;
      } else {
        throw ConfigError("scenario line " + std::to_string(lineno) +
                          ": unknown obstacle kind '" + kind + "'");
      }
      sc.fixed.push_back(ob);
    } else {
      throw ConfigError("scenario line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
    if (ls.fail())
      throw ConfigError("scenario line " + std::to_string(lineno) +
                        ": bad value");
  }
  if (segs.empty())
    throw ConfigError("scenario defines no track segments");
  sc.track = Track(std::move(segs), lane_width, num_lanes);
  return sc;
}

Scenario Scenario::load(const std::filesystem::path& path,
                        const RunConfig::Sim& cfg) {
  return parse(read_text_file(path), cfg);
}

DrivingEnv::DrivingEnv(const RunConfig::Sim& cfg, Scenario scenario)
    : cfg_(cfg), scenario_(std::move(scenario)) {
  reset(0);
}

double DrivingEnv::spawn_obstacle_s(Rng& rng, std::vector<double>& used,
                                    bool straight_only) const {
  const Track& tr = scenario_.track;
  const double lo = cfg_.obstacle_s_min;
  const double hi = tr.length() - 40.0;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double s = rng.uniform(lo, hi);
    if (straight_only && std::abs(tr.curvature_at(s)) > 1e-9) continue;
    bool ok = true;
    for (double u : used)
      if (std::abs(u - s) < cfg_.obstacle_min_gap) {
        ok = false;
        break;
      }
    if (!ok) continue;
    used.push_back(s);
    return s;
  }
  // dense request: fall back to the last draw without the gap constraint
  const double s = rng.uniform(lo, hi);
  used.push_back(s);
  return s;
}

void DrivingEnv::layout_obstacles(std::uint64_t seed) {
  obstacles_.clear();
  const Track& tr = scenario_.track;
  const double lane_c = tr.ego_lane_center();

  auto place = [&](double s, double lateral, double radius, double speed,
                   bool mover) {
    double x, y, h;
    tr.pose_at(s, x, y, h);
    ObstacleState ob;
    // positive lateral offsets along the left normal (-sin h, cos h)
    ob.x = x - std::sin(h) * lateral;
    ob.y = y + std::cos(h) * lateral;
    ob.radius = radius;
    ob.mover = mover;
    if (mover) {
      ob.vx = std::cos(h) * speed;
      ob.vy = std::sin(h) * speed;
    }
    obstacles_.push_back(ob);
  };

  for (const Scenario::FixedObstacle& f : scenario_.fixed)
    place(f.s, f.lateral, f.radius, f.speed, f.mover);

  Rng rng(seed, "obstacle-layout");
  std::vector<double> used;
  for (const ObstacleState& ob : obstacles_) {
    const TrackFrame f = tr.project(ob.x, ob.y);
    used.push_back(f.s);
  }
  for (int i = 0; i < scenario_.random_static; ++i) {
    const double s = spawn_obstacle_s(rng, used, false);
    const double lat =
        lane_c + rng.uniform(-cfg_.obstacle_lat_jitter, cfg_.obstacle_lat_jitter);
    const double r = rng.uniform(cfg_.obstacle_r_min, cfg_.obstacle_r_max);
    place(s, lat, r, 0, false);
  }
  for (int i = 0; i < scenario_.random_movers; ++i) {
    const double s = spawn_obstacle_s(rng, used, true);
    const double lat = lane_c + rng.uniform(-cfg_.obstacle_lat_jitter / 2,
                                            cfg_.obstacle_lat_jitter / 2);
    const double r = rng.uniform(cfg_.obstacle_r_min,
                                 0.5 * (cfg_.obstacle_r_min + cfg_.obstacle_r_max));
    const double sp = rng.uniform(cfg_.mover_speed_min, cfg_.mover_speed_max);
    place(s, lat, r, sp, true);
  }
}

ObsPtr DrivingEnv::reset(std::uint64_t seed) {
  layout_obstacles(seed);
  const Track& tr = scenario_.track;
  double x, y, h;
  tr.pose_at(0, x, y, h);
  veh_.x = x + (-std::sin(h)) * tr.ego_lane_center();
  veh_.y = y + std::cos(h) * tr.ego_lane_center();
  veh_.heading = h;
  veh_.speed = 0;
  steps_ = 0;
  done_ = false;
  return observe();
}

double DrivingEnv::obstacle_gap() const {
  double best = cfg_.lidar_range;
  for (const ObstacleState& ob : obstacles_) {
    const double gap =
        std::hypot(veh_.x - ob.x, veh_.y - ob.y) - ob.radius;
    best = std::min(best, gap);
  }
  return std::max(0.0, best);
}

double DrivingEnv::reward(bool collision, bool success, double d_lane,
                          double d_min) const {
  if (collision) return -10.0;
  const double half_lane = cfg_.lane_width / 2.0;
  const double lane_term =
      std::pow(1.0 - std::min(std::abs(d_lane) / half_lane, 1.0), 2.0);
  const double prox = std::max(0.0, (cfg_.d_safe - d_min) / cfg_.d_safe);
  double r = 0.1 + 1.0 * lane_term - 0.5 * prox * prox;
  if (success) r += 2.0;
  return clampd(r, -10.0, 2.0);
}

StepInfo DrivingEnv::step_physics(const Action& a) {
  if (done_) throw std::logic_error("episode done: call reset before stepping");
  const double dt = cfg_.dt;
  const double steer = clampd(a.steering, -1.0, 1.0) * cfg_.delta_max;
  const double v_target = clampd(a.speed, 0.0, 1.0) * cfg_.v_max;

  // first-order speed response, then kinematic bicycle advance
  veh_.speed += dt / cfg_.speed_tau * (v_target - veh_.speed);
  veh_.x += veh_.speed * std::cos(veh_.heading) * dt;
  veh_.y += veh_.speed * std::sin(veh_.heading) * dt;
  veh_.heading =
      wrap_pi(veh_.heading + veh_.speed * std::tan(steer) / cfg_.wheelbase * dt);

  for (ObstacleState& ob : obstacles_) {
    ob.x += ob.vx * dt;
    ob.y += ob.vy * dt;
  }
  ++steps_;

  StepInfo info = this->info();
  done_ = info.done;
  return info;
}

StepInfo DrivingEnv::info() const {
  StepInfo info;
  const TrackFrame f = scenario_.track.project(veh_.x, veh_.y);
  info.steps = steps_;
  info.progress = f.s;
  info.d_lane_m = f.d - scenario_.track.ego_lane_center();
  info.d_lane_px = info.d_lane_m * cfg_.px_per_m;
  info.d_min = obstacle_gap();
  info.collision = info.d_min < cfg_.d_collision;
  info.success = !info.collision && f.s >= goal_s();
  info.timeout = steps_ >= cfg_.max_episode_steps;
  info.done = info.collision || info.success || info.timeout;
  info.r_env = reward(info.collision, info.success, info.d_lane_m, info.d_min);
  return info;
}

ObsPtr DrivingEnv::observe() const {
  auto obs = std::make_shared<Observation>();
  obs->image = render_pseudo_camera(veh_, obstacles_, scenario_.track,
                                    cfg_.image_size);
  obs->lidar = raycast_lidar(veh_, obstacles_, scenario_.track,
                             cfg_.lidar_beams, cfg_.lidar_range);
  obs->speed_norm =
      static_cast<float>(clampd(veh_.speed / cfg_.v_max, 0.0, 1.0));
  return obs;
}

StepResult DrivingEnv::step(const Action& a) {
  StepResult r;
  r.info = step_physics(a);
  r.obs = observe();
  return r;
}

void DrivingEnv::save_state(std::ostream& os) const {
  const auto prec = os.precision(17);  // exact double round-trip
  os << "env " << veh_.x << ' ' << veh_.y << ' ' << veh_.heading << ' '
     << veh_.speed << ' ' << steps_ << ' ' << (done_ ? 1 : 0) << ' '
     << obstacles_.size() << '\n';
  for (const ObstacleState& o : obstacles_)
    os << o.x << ' ' << o.y << ' ' << o.radius << ' ' << o.vx << ' ' << o.vy
       << ' ' << (o.mover ? 1 : 0) << '\n';
  os.precision(prec);
}

void DrivingEnv::load_state(std::istream& is) {
  std::string tag;
  int done = 0, nobs = 0;
  is >> tag >> veh_.x >> veh_.y >> veh_.heading >> veh_.speed >> steps_ >>
      done >> nobs;
  if (!is || tag != "env")
    throw IoError("environment state: bad header");
  done_ = done != 0;
  obstacles_.assign(static_cast<size_t>(nobs), ObstacleState{});
  for (ObstacleState& o : obstacles_) {
    int mover = 0;
    is >> o.x >> o.y >> o.radius >> o.vx >> o.vy >> mover;
    o.mover = mover != 0;
  }
  if (!is) throw IoError("environment state: truncated");
}

}  // namespace dal::sim

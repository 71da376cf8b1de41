#include "dal/expert/fsm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

namespace dal::expert {
namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}
}  // namespace

const char* fsm_state_name(FsmState s) {
  switch (s) {
    case FsmState::LaneFollowing: return "lane_following";
    case FsmState::ObstacleAvoidance: return "obstacle_avoidance";
    case FsmState::DrivingStraight: return "driving_straight";
    case FsmState::Returning: return "returning";
  }
  return "?";
}

void FsmExpert::reset() {
  mode_ = FsmState::LaneFollowing;
  target_lat_ = 0;
  ref_lat_ = 0;
  ref_init_ = false;
  avoid_idx_ = -1;
  avoid_side_ = 0;
  prev_ = {0.0f, 0.0f};
}

FsmExpert::Threat FsmExpert::find_threat(const sim::DrivingEnv& env,
                                         const sim::TrackFrame& f,
                                         double path_lat,
                                         double window) const {
  const sim::VehicleState& v = env.vehicle();
  const double cone = cfg_.cone_half_angle_deg * kPi / 180.0;
  Threat best;
  const auto& obstacles = env.obstacles();
  for (size_t i = 0; i < obstacles.size(); ++i) {
    const sim::ObstacleState& ob = obstacles[i];
    const double dx = ob.x - v.x, dy = ob.y - v.y;
    const double gap = std::hypot(dx, dy) - ob.radius;
    const sim::TrackFrame fo = env.track().project(ob.x, ob.y);
    // near branch: anything close inside the heading cone. far branch: ahead
    // along the road and straddling the line the vehicle intends to drive
    // (a bearing cone misses constant-bearing convergence, e.g. slow movers)
    const bool near_cone =
        gap <= cfg_.d_avoid &&
        std::abs(wrap_pi(std::atan2(dy, dx) - v.heading)) <= cone;
    const double ds = fo.s - f.s;
    const bool blocking =
        ds > 0.0 && ds < window &&
        std::abs(fo.d - path_lat) < ob.radius + cfg_.in_path_margin;
    if (!near_cone && !blocking) continue;
    if (!best.found || gap < best.gap) {
      best.found = true;
      best.index = static_cast<int>(i);
      best.gap = gap;
      best.s = fo.s;
      best.d = fo.d;
      best.radius = ob.radius;
      best.vd = -ob.vx * std::sin(fo.heading) + ob.vy * std::cos(fo.heading);
      best.vs = ob.vx * std::cos(fo.heading) + ob.vy * std::sin(fo.heading);
    }
  }
  (void)f;
  return best;
}

void FsmExpert::choose_avoidance(const sim::DrivingEnv& env,
                                 const sim::TrackFrame& f, const Threat& th,
                                 bool keep_side) {
  const double edge = env.track().half_width() - cfg_.edge_margin;
  const double want = cfg_.lateral_clearance;

  // every obstacle near the forward window constrains the escape lateral; a
  // single-threat offset can steer straight into the next blocker. the window
  // always covers the primary threat (early engagements see past d_react).
  // a drifting mover blocks the hull of its band from now until the vehicle
  // draws abeam of it, so corridors respect where it is and where it will be
  // for as long as it matters
  constexpr double kLeadMax = 6.0;   // s
  constexpr double kDriftTail = 0.8;  // s: exposure continues through the pass
  // the pass is flown at avoidance speed, whatever the speed is right now
  const double pass_v = cfg_.avoid_cmd * env.params().v_max;
  const double vref = std::max(
      std::min(static_cast<double>(env.vehicle().speed), pass_v), 1.0);
  const auto lead_time = [&](double ds, double vs) {
    return std::clamp(ds / std::max(vref - vs, 0.5), 0.0, kLeadMax) +
           kDriftTail;
  };
  struct Disc {
    double d, r;
  };
  const double near_win = std::max(cfg_.d_react, th.s - f.s + 2.0);
  std::vector<Disc> near;
  for (const sim::ObstacleState& ob : env.obstacles()) {
    const sim::TrackFrame fo = env.track().project(ob.x, ob.y);
    const double ds = fo.s - f.s;
    if (ds > -2.0 && ds < near_win) {
      const double vd =
          -ob.vx * std::sin(fo.heading) + ob.vy * std::cos(fo.heading);
      const double vs =
          ob.vx * std::cos(fo.heading) + ob.vy * std::sin(fo.heading);
      const double lead = lead_time(ds, vs) * vd;
      near.push_back(
          {fo.d + 0.5 * lead, ob.radius + 0.5 * std::abs(lead)});
    }
  }

  const auto clearance = [&](double t) {
    double c = 1e9;
    for (const Disc& o : near) c = std::min(c, std::abs(t - o.d) - o.r);
    return c;
  };

  // side order: a locked pass keeps its side (re-crossing a drifting mover's
  // band mid-pass is never worth it); a vehicle already clear of the threat's
  // band stays on its own side; otherwise take the side with more edge room,
  // judged at the projected position
  const double lead_th = lead_time(th.s - f.s, th.vs) * th.vd;
  const double d_eff = th.d + lead_th;
  const double room_left = edge - (d_eff + th.radius);
  const double room_right = (d_eff - th.radius) - (-edge);
  const int on_side = std::abs(f.d - th.d) > th.radius + 0.3
                          ? (f.d > th.d ? 1 : -1)
                          : 0;
  double first;
  if (keep_side && avoid_side_ != 0)
    first = avoid_side_;
  else if (on_side != 0)
    first = on_side;
  else
    first = room_left >= room_right ? 1.0 : -1.0;
  const bool lock = keep_side && avoid_side_ != 0;

  constexpr double kSqueezeFloor = 1.3;  // still outside collision range
  constexpr double kCrossRange = 8.0;    // road needed to swap sides safely

  // comfortable corridor on one side: push outward until everything clears
  // a corridor is acceptable only if its side's clearing line is
  // kinematically reachable by the threat's abeam: lateral progress per
  // meter of runway is bounded by the capped approach angle
  constexpr double kReachSlope = 0.5;  // m lateral per m of runway
  const double ds_run = std::max(th.s - f.s, 0.5);
  const auto reachable = [&](double side) {
    const double d_need = th.d + 0.5 * lead_th +
                          side * (th.radius + 0.5 * std::abs(lead_th) + 1.05);
    return side * (d_need - f.d) <= kReachSlope * ds_run;
  };

  const auto comfortable = [&](double side, double* out) {
    double t = th.d + 0.5 * lead_th +
               side * (th.radius + 0.5 * std::abs(lead_th) + want);
    for (size_t k = 0; k <= near.size(); ++k) {
      bool moved = false;
      for (const Disc& o : near) {
        if (std::abs(t - o.d) < o.r + want - 1e-9) {
          t = o.d + side * (o.r + want);
          moved = true;
        }
      }
      if (!moved) break;
    }
    *out = t;
    return std::abs(t) <= edge && clearance(t) >= want - 1e-9 &&
           reachable(side);
  };
  // tightest acceptable corridor on one side of the threat
  const auto squeeze = [&](double side, double* out) {
    double t0 = 0;
    comfortable(side, &t0);
    std::vector<double> cands{side * edge, std::clamp(t0, -edge, edge)};
    for (const Disc& a : near)
      for (const Disc& b : near) {
        const double mid = 0.5 * ((a.d + a.r) + (b.d - b.r));
        if (std::abs(mid) <= edge && (mid - d_eff) * side > 0)
          cands.push_back(mid);
      }
    double bt = 0, bc = -1e9;
    for (double tc : cands) {
      const double c = clearance(tc);
      if (c > bc) bt = tc, bc = c;
    }
    *out = bt;
    return bc >= kSqueezeFloor && reachable(side);
  };

  // crossing the threat's band needs road; a committed pass (locked side, or
  // the vehicle already clear of the band) flips only when there is enough,
  // and prefers a squeeze on its own side over a comfortable flip when close
  const double ds_th = th.s - f.s;
  const bool can_cross = ds_th >= kCrossRange || on_side == 0;
  const bool committed = lock || on_side != 0;

  double best_t = 0, best_c = -1e9;
  bool accepted = false;
  double t = 0;
  if (comfortable(first, &t)) {
    best_t = t;
    accepted = true;
  } else if (!committed && can_cross && comfortable(-first, &t)) {
    best_t = t;
    accepted = true;
  } else if (committed && squeeze(first, &t)) {
    best_t = t;
    accepted = true;
  } else if (committed && can_cross && comfortable(-first, &t)) {
    best_t = t;
    accepted = true;
  }
  if (!accepted) {
    // no corridor on any allowed side: take the widest reachable gap on the
    // road, the widest outright only if nothing survivable is reachable
    std::vector<double> cands{-edge, edge};
    for (const Disc& a : near)
      for (const Disc& b : near) {
        const double mid = 0.5 * ((a.d + a.r) + (b.d - b.r));
        if (std::abs(mid) <= edge) cands.push_back(mid);
      }
    best_c = -1e9;
    for (double t : cands) {
      const double c = clearance(t);
      if (c < 1.05 || !reachable(t > d_eff ? 1.0 : -1.0)) continue;
      if (c > best_c + 1e-9 ||
          (c > best_c - 1e-9 && std::abs(t - f.d) < std::abs(best_t - f.d)))
        best_t = t, best_c = c, accepted = true;
    }
    if (!accepted) {
      best_c = -1e9;
      for (double t : cands) {
        const double c = clearance(t);
        if (c > best_c + 1e-9 ||
            (c > best_c - 1e-9 && std::abs(t - f.d) < std::abs(best_t - f.d)))
          best_t = t, best_c = c;
      }
    }
  }
  target_lat_ = std::clamp(best_t, -edge, edge);
  avoid_idx_ = th.index;
  if (target_lat_ > d_eff + 1e-9)
    avoid_side_ = 1;
  else if (target_lat_ < d_eff - 1e-9)
    avoid_side_ = -1;
  mode_ = FsmState::ObstacleAvoidance;
}

sim::Action FsmExpert::act(const sim::DrivingEnv& env) {
  const sim::VehicleState& v = env.vehicle();
  const sim::Track& tr = env.track();
  const sim::TrackFrame f = tr.project(v.x, v.y);
  const double lane_c = tr.ego_lane_center();
  bool tight_cross = false;

  // current road position of the avoided obstacle (movers drift), read
  // after any retarget so the transition tests never see a stale index.
  // clear_behind scales with the obstacle's forward speed: a mover that is
  // barely behind re-closes the gap during the return transient
  double obs_s = 0, obs_r = 0, clear_behind = 0;
  const auto avoided = [&]() {
    if (avoid_idx_ < 0 ||
        avoid_idx_ >= static_cast<int>(env.obstacles().size()))
      return false;
    const sim::ObstacleState& ob =
        env.obstacles()[static_cast<size_t>(avoid_idx_)];
    const sim::TrackFrame fo = tr.project(ob.x, ob.y);
    const double vs =
        ob.vx * std::cos(fo.heading) + ob.vy * std::sin(fo.heading);
    obs_s = fo.s;
    obs_r = ob.radius;
    clear_behind = ob.radius + cfg_.behind_margin + 3.0 * std::max(0.0, vs);
    return true;
  };

  switch (mode_) {
    case FsmState::LaneFollowing: {
      target_lat_ = lane_c;
      const Threat th = find_threat(env, f, lane_c, cfg_.d_react);
      if (th.found) choose_avoidance(env, f, th, false);
      break;
    }
    case FsmState::ObstacleAvoidance: {
      // a different, closer blocker supersedes the current one; otherwise
      // refresh the corridor against current obstacle positions
      const Threat th = find_threat(env, f, target_lat_, cfg_.d_react);
      if (th.found && th.index != avoid_idx_) {
        choose_avoidance(env, f, th, false);
      } else if (avoided()) {
        Threat cur;
        cur.found = true;
        cur.index = avoid_idx_;
        cur.s = obs_s;
        cur.radius = obs_r;
        const sim::ObstacleState& ob =
            env.obstacles()[static_cast<size_t>(avoid_idx_)];
        const sim::TrackFrame fo = tr.project(ob.x, ob.y);
        cur.d = fo.d;
        cur.vd = -ob.vx * std::sin(fo.heading) + ob.vy * std::cos(fo.heading);
        cur.vs = ob.vx * std::cos(fo.heading) + ob.vy * std::sin(fo.heading);
        choose_avoidance(env, f, cur, true);
      }
      if (!avoided()) {
        mode_ = FsmState::Returning;
        target_lat_ = lane_c;
        avoid_idx_ = -1;
        avoid_side_ = 0;
        break;
      }
      const bool settled =
          std::abs(f.d - target_lat_) < 0.35 &&
          std::abs(wrap_pi(v.heading - f.heading)) < 0.15;
      if (obs_s < f.s - clear_behind) {
        mode_ = FsmState::Returning;  // passed it without ever settling
        target_lat_ = lane_c;
        avoid_idx_ = -1;
        avoid_side_ = 0;
      } else if (obs_s - f.s < cfg_.abeam_enter && settled) {
        mode_ = FsmState::DrivingStraight;  // hold heading beside it
      }
      // a predicted-thin pass (vs any disc ahead, at its abeam time)
      // steepens the approach below instead of slowing it: the steering cap
      // scales with speed, so slowing buys no lateral progress per meter of
      // runway and loses some on arcs where the feedforward takes a fixed
      // share of the cap
      if (mode_ == FsmState::ObstacleAvoidance && avoid_side_ != 0) {
        const double edot0 =
            v.speed * std::sin(wrap_pi(v.heading - f.heading));
        for (const sim::ObstacleState& ob : env.obstacles()) {
          const sim::TrackFrame fo = tr.project(ob.x, ob.y);
          const double ds = fo.s - f.s;
          if (ds < 0.2 || ds > 12.0) continue;
          const double vd =
              -ob.vx * std::sin(fo.heading) + ob.vy * std::cos(fo.heading);
          const double vs =
              ob.vx * std::cos(fo.heading) + ob.vy * std::sin(fo.heading);
          const double t_ab =
              std::clamp(ds / std::max(v.speed - vs, 0.5), 0.0, 8.0);
          const double margin =
              std::abs((f.d + edot0 * t_ab) - (fo.d + vd * t_ab)) - ob.radius;
          if (margin < 1.05) {
            tight_cross = true;
            break;
          }
        }
      }
      break;
    }
    case FsmState::DrivingStraight: {
      const Threat th = find_threat(env, f, target_lat_, cfg_.d_react);
      const bool have = avoided();
      if (th.found && th.index != avoid_idx_) {
        choose_avoidance(env, f, th, false);
      } else if (!have || obs_s < f.s - clear_behind) {
        mode_ = FsmState::Returning;
        target_lat_ = lane_c;
        avoid_idx_ = -1;
        avoid_side_ = 0;
      }
      break;
    }
    case FsmState::Returning: {
      // scan past the normal window: committing to the dive with a blocker
      // just beyond it means meeting that blocker mid-transient
      target_lat_ = lane_c;
      const Threat th =
          find_threat(env, f, lane_c, cfg_.d_react + cfg_.return_lookahead);
      if (th.found) {
        choose_avoidance(env, f, th, false);
      } else if (std::abs(f.d - lane_c) < cfg_.return_tol &&
                 std::abs(wrap_pi(v.heading - f.heading)) <
                     cfg_.return_heading_tol) {
        mode_ = FsmState::LaneFollowing;
      }
      break;
    }
  }

  // slew-limit the tracked reference so mode switches never step the error;
  // the actuator's per-step delta cap cannot follow step commands at speed
  if (!ref_init_) {
    ref_lat_ = f.d;
    ref_init_ = true;
  }
  // when the commanded side flips across the vehicle, a reference still on
  // the old side would first pull it the wrong way; restart the slew from
  // where the vehicle actually is
  if ((target_lat_ - f.d) * (ref_lat_ - f.d) < -1e-9 &&
      std::abs(ref_lat_ - f.d) > 0.5)
    ref_lat_ = f.d;
  // taper the slew as the reference converges so the commanded approach
  // angle shrinks near the set-point instead of arriving at full rate and
  // overshooting through it
  constexpr double kTaperGain = 1.2;   // 1/s
  constexpr double kTaperFloor = 0.3;  // m/s
  const double rate = std::min(
      cfg_.ref_rate, kTaperGain * std::abs(target_lat_ - ref_lat_) + kTaperFloor);
  const double ref_step = rate * env.params().dt;
  ref_lat_ += std::clamp(target_lat_ - ref_lat_, -ref_step, ref_step);

  // steering: curvature feedforward along the offset path + PD on the error;
  // the P term is bounded by a fraction of the D term's full authority so a
  // large error commands a finite approach angle instead of winding up the
  // heading (saturated pure P limit-cycles)
  double steer = 0.0;
  if (mode_ != FsmState::DrivingStraight) {
    const double kap = f.curvature;
    const double denom = 1.0 - f.d * kap;
    const double kap_eff =
        kap / (std::abs(denom) < 0.2 ? (denom < 0 ? -0.2 : 0.2) : denom);
    const double ff =
        std::atan(env.params().wheelbase * kap_eff) / env.params().delta_max;
    const double e = f.d - ref_lat_;
    const double edot = v.speed * std::sin(wrap_pi(v.heading - f.heading));
    // under a predicted-thin pass, raise the approach-angle cap only in
    // proportion to how far the vehicle lags the moving reference: full
    // authority to catch up, stock arrival dynamics once caught up
    const double dir = target_lat_ > ref_lat_ + 1e-9   ? 1.0
                       : target_lat_ < ref_lat_ - 1e-9 ? -1.0
                                                       : 0.0;
    const double lag = std::max(0.0, -dir * e);
    const double boost =
        tight_cross ? std::clamp((lag - 0.8) / 1.2, 0.0, 1.0) : 0.0;
    const double frac = cfg_.p_cap_frac + (0.85 - cfg_.p_cap_frac) * boost;
    const double p_cap = frac * cfg_.kd * std::max(v.speed, 2.0);
    const double p_term = std::clamp(cfg_.kp * e, -p_cap, p_cap);
    steer = std::clamp(ff - p_term - cfg_.kd * edot, -1.0, 1.0);
  }

  double speed_cmd = cfg_.cruise_cmd;
  if (mode_ == FsmState::ObstacleAvoidance ||
      mode_ == FsmState::DrivingStraight)
    speed_cmd = cfg_.avoid_cmd;
  else if (mode_ == FsmState::Returning)
    speed_cmd = 0.5 * (cfg_.cruise_cmd + cfg_.avoid_cmd);

  // continuity: cap the per-step change of both components
  const double cap = cfg_.action_delta_cap;
  steer = std::clamp(steer, prev_.steering - cap, prev_.steering + cap);
  speed_cmd = std::clamp(speed_cmd, prev_.speed - cap, prev_.speed + cap);

  prev_ = {static_cast<float>(std::clamp(steer, -1.0, 1.0)),
           static_cast<float>(std::clamp(speed_cmd, 0.0, 1.0))};
  return prev_;
}

void FsmExpert::save(std::ostream& os) const {
  const auto prec = os.precision(17);  // exact double round-trip
  os << "fsm " << static_cast<int>(mode_) << ' ' << avoid_idx_ << ' '
     << avoid_side_ << ' ' << static_cast<int>(ref_init_) << ' ' << target_lat_
     << ' ' << ref_lat_ << ' ' << static_cast<double>(prev_.steering) << ' '
     << static_cast<double>(prev_.speed) << '\n';
  os.precision(prec);
}

void FsmExpert::load(std::istream& is) {
  std::string tag;
  int m = 0, ri = 0;
  double tl = 0, rl = 0, ps = 0, pv = 0;
  is >> tag >> m >> avoid_idx_ >> avoid_side_ >> ri >> tl >> rl >> ps >> pv;
  mode_ = static_cast<FsmState>(m);
  target_lat_ = tl;
  ref_lat_ = rl;
  ref_init_ = ri != 0;
  prev_ = {static_cast<float>(ps), static_cast<float>(pv)};
}

}  // namespace dal::expert

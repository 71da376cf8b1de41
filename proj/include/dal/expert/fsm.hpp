#pragma once

#include <iosfwd>

#include "dal/core/config.hpp"
#include "dal/sim/env.hpp"

namespace dal::expert {

enum class FsmState : int {
  LaneFollowing = 0,
  ObstacleAvoidance = 1,
  DrivingStraight = 2,
  Returning = 3,
};
inline constexpr int kFsmStateCount = 4;
const char* fsm_state_name(FsmState s);

// Deterministic four-mode driving controller with privileged access to the
// simulator state. Steering = curvature feedforward + PD on the lateral error
// to the mode's set-point; per-step action deltas are capped so the command
// stays continuous in time.
class FsmExpert {
 public:
  FsmExpert() = default;
  explicit FsmExpert(const RunConfig::Expert& cfg) : cfg_(cfg) {}

  void reset();

  // advances the mode machine and returns the action for the current state
  sim::Action act(const sim::DrivingEnv& env);

  FsmState state() const { return mode_; }
  double target_lateral() const { return target_lat_; }

  // exact internal-state round trip (checkpointing)
  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  struct Threat {
    bool found = false;
    int index = -1;
    double gap = 0;  // Euclidean clearance to the disc edge
    double s = 0, d = 0, radius = 0;
    double vd = 0;  // lateral drift rate in the road frame
    double vs = 0;  // along-road speed
  };
  Threat find_threat(const sim::DrivingEnv& env, const sim::TrackFrame& f,
                     double path_lat, double window) const;
  void choose_avoidance(const sim::DrivingEnv& env, const sim::TrackFrame& f,
                        const Threat& th, bool keep_side);

  RunConfig::Expert cfg_;
  FsmState mode_ = FsmState::LaneFollowing;
  double target_lat_ = 0;  // lateral set-point of the current mode
  double ref_lat_ = 0;     // slew-limited reference actually tracked
  bool ref_init_ = false;
  int avoid_idx_ = -1;     // obstacle being avoided
  int avoid_side_ = 0;     // corridor side vs that obstacle (+1 left)
  sim::Action prev_{0.0f, 0.0f};
};

}  // namespace dal::expert

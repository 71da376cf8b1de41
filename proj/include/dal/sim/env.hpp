#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dal/core/config.hpp"
#include "dal/core/rng.hpp"
#include "dal/sim/track.hpp"
#include "dal/sim/types.hpp"

namespace dal::sim {

struct StepResult {
  ObsPtr obs;
  StepInfo info;
};

// Fixed part of a world: the course plus either an explicit obstacle list
// or generation counts for seeded random layouts.
struct Scenario {
  Track track;
  struct FixedObstacle {
    double s = 0, lateral = 0, radius = 0.5;
    double speed = 0;  // movers: speed along the local tangent at spawn
    bool mover = false;
  };
  std::vector<FixedObstacle> fixed;
  int random_static = 0;
  int random_movers = 0;

  static Scenario from_config(const RunConfig::Sim& cfg);
  static Scenario parse(const std::string& text, const RunConfig::Sim& cfg);
  static Scenario load(const std::filesystem::path& path,
                       const RunConfig::Sim& cfg);
};

class DrivingEnv {
 public:
  DrivingEnv(const RunConfig::Sim& cfg, Scenario scenario);

  // seeds the obstacle layout and re-spawns the vehicle at the lane center
  ObsPtr reset(std::uint64_t seed);

  StepResult step(const Action& a);

  // identical dynamics without building an Observation (internal rollouts)
  StepInfo step_physics(const Action& a);

  // state of the CURRENT (pre-step) world, d_min / d_lane included
  StepInfo info() const;

  ObsPtr observe() const;  // render the current state

  const VehicleState& vehicle() const { return veh_; }
  const std::vector<ObstacleState>& obstacles() const { return obstacles_; }
  const Track& track() const { return scenario_.track; }
  const RunConfig::Sim& params() const { return cfg_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  double goal_s() const { return scenario_.track.length() - cfg_.goal_margin; }

  // value-copy of the physical state for lookahead rollouts
  DrivingEnv clone_physics() const { return *this; }

  // exact text round-trip of the physical state
  void save_state(std::ostream& os) const;
  void load_state(std::istream& is);

 private:
  void layout_obstacles(std::uint64_t seed);
  double spawn_obstacle_s(Rng& rng, std::vector<double>& used,
                          bool straight_only) const;
  double obstacle_gap() const;
  double reward(bool collision, bool success, double d_lane,
                double d_min) const;

  RunConfig::Sim cfg_;
  Scenario scenario_;
  VehicleState veh_;
  std::vector<ObstacleState> obstacles_;
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace dal::sim

#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dal/core/rng.hpp"
#include "dal/expert/fsm.hpp"
#include "dal/sim/types.hpp"

namespace dal::expert {

// One stored environment interaction. `action_executed` is the LEARNING
// action: imitation targets read it, and experience correction may have
// replaced it with the expert's action even though the vehicle physically
// drove a blended command. `action_expert` is always the expert's opinion.
struct Transition {
  sim::ObsPtr obs;
  sim::ObsPtr next_obs;
  sim::Action action_executed;
  sim::Action action_expert;
  float reward = 0;
  bool done = false;
  FsmState fsm_state = FsmState::LaneFollowing;
  bool intervention = false;
  bool phase1 = true;  // collected during the pure-imitation phase
};

// Mode-partitioned FIFO store. Storage is always partitioned by the expert
// mode tag; sampling strategy (uniform vs balanced) is the caller's choice.
// Eviction at capacity removes the oldest element of the largest partition
// (ties broken toward the lowest mode index), preserving rare-mode coverage.
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}

  void store(Transition t);

  size_t size() const { return total_; }
  size_t partition_size(FsmState s) const {
    return parts_[static_cast<size_t>(s)].size();
  }
  const Transition& at(FsmState s, size_t i) const {
    return parts_[static_cast<size_t>(s)][i];
  }

  // B drawn as evenly as possible across nonempty partitions; the remainder
  // goes to randomly chosen partitions so long-run frequencies stay at 1/k.
  // Within a partition: without replacement when it is large enough for its
  // quota, with replacement otherwise. Throws on an empty buffer.
  std::vector<Transition> sample_balanced(int B, Rng& rng) const;

  // uniform over the union of all partitions
  std::vector<Transition> sample_uniform(int B, Rng& rng) const;

  // same sampling rules restricted to transitions passing `keep`;
  // returns an empty vector when no transition qualifies
  std::vector<Transition> sample_balanced_if(
      int B, Rng& rng, const std::function<bool(const Transition&)>& keep) const;
  std::vector<Transition> sample_uniform_if(
      int B, Rng& rng, const std::function<bool(const Transition&)>& keep) const;

  size_t count_if(const std::function<bool(const Transition&)>& keep) const;

  // full binary round trip (observations deduplicated by identity)
  void save(std::ostream& os) const;
  void load(std::istream& is);

  int capacity() const { return capacity_; }

 private:
  std::vector<Transition> draw(
      const std::vector<std::vector<const Transition*>>& pools, int B,
      Rng& rng) const;

  int capacity_ = 50000;
  size_t total_ = 0;
  std::deque<Transition> parts_[kFsmStateCount];
};

}  // namespace dal::expert

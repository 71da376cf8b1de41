#include "dal/expert/replay.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "dal/core/errors.hpp"

namespace dal::expert {

void ReplayBuffer::store(Transition t) {
  if (total_ >= static_cast<size_t>(capacity_)) {
    size_t largest = 0;
    for (size_t i = 1; i < kFsmStateCount; ++i)
      if (parts_[i].size() > parts_[largest].size()) largest = i;
    parts_[largest].pop_front();
    --total_;
  }
  parts_[static_cast<size_t>(t.fsm_state)].push_back(std::move(t));
  ++total_;
}

std::vector<Transition> ReplayBuffer::draw(
    const std::vector<std::vector<const Transition*>>& pools, int B,
    Rng& rng) const {
  std::vector<size_t> nonempty;
  for (size_t i = 0; i < pools.size(); ++i)
    if (!pools[i].empty()) nonempty.push_back(i);
  if (nonempty.empty()) return {};

  const int k = static_cast<int>(nonempty.size());
  std::vector<int> quota(nonempty.size(), B / k);
  // spread the remainder over randomly chosen partitions (no replacement)
  const int rem = B % k;
  std::vector<size_t> order(nonempty.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (size_t i = 0; i < static_cast<size_t>(rem) && i < order.size(); ++i) {
    const size_t j = i + static_cast<size_t>(rng.uniform_int(
                             static_cast<int>(order.size() - i)));
    std::swap(order[i], order[j]);
    ++quota[order[i]];
  }

  std::vector<Transition> out;
  out.reserve(static_cast<size_t>(B));
  for (size_t qi = 0; qi < nonempty.size(); ++qi) {
    const auto& pool = pools[nonempty[qi]];
    const int q = quota[qi];
    const int n = static_cast<int>(pool.size());
    if (n >= q) {
      // partial Fisher-Yates: q distinct uniform picks
      std::vector<int> idx(static_cast<size_t>(n));
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < q; ++i) {
        const int j = i + rng.uniform_int(n - i);
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
        out.push_back(*pool[static_cast<size_t>(idx[static_cast<size_t>(i)])]);
      }
    } else {
      for (int i = 0; i < q; ++i)
        out.push_back(*pool[static_cast<size_t>(rng.uniform_int(n))]);
    }
  }
  return out;
}

std::vector<Transition> ReplayBuffer::sample_balanced(int B, Rng& rng) const {
  if (total_ == 0) throw std::logic_error("sampling from an empty buffer");
  std::vector<std::vector<const Transition*>> pools(kFsmStateCount);
  for (size_t p = 0; p < kFsmStateCount; ++p) {
    pools[p].reserve(parts_[p].size());
    for (const Transition& t : parts_[p]) pools[p].push_back(&t);
  }
  return draw(pools, B, rng);
}

std::vector<Transition> ReplayBuffer::sample_uniform(int B, Rng& rng) const {
  if (total_ == 0) throw std::logic_error("sampling from an empty buffer");
  std::vector<std::vector<const Transition*>> pools(1);
  pools[0].reserve(total_);
  for (const auto& part : parts_)
    for (const Transition& t : part) pools[0].push_back(&t);
  return draw(pools, B, rng);
}

std::vector<Transition> ReplayBuffer::sample_balanced_if(
    int B, Rng& rng,
    const std::function<bool(const Transition&)>& keep) const {
  std::vector<std::vector<const Transition*>> pools(kFsmStateCount);
  for (size_t p = 0; p < kFsmStateCount; ++p)
    for (const Transition& t : parts_[p])
      if (keep(t)) pools[p].push_back(&t);
  return draw(pools, B, rng);
}

std::vector<Transition> ReplayBuffer::sample_uniform_if(
    int B, Rng& rng,
    const std::function<bool(const Transition&)>& keep) const {
  std::vector<std::vector<const Transition*>> pools(1);
  for (const auto& part : parts_)
    for (const Transition& t : part)
      if (keep(t)) pools[0].push_back(&t);
  return draw(pools, B, rng);
}

size_t ReplayBuffer::count_if(
    const std::function<bool(const Transition&)>& keep) const {
  size_t n = 0;
  for (const auto& part : parts_)
    for (const Transition& t : part) n += keep(t) ? 1 : 0;
  return n;
}

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_obs(std::ostream& os, const sim::Observation& o) {
  put<std::uint64_t>(os, o.image.size());
  os.write(reinterpret_cast<const char*>(o.image.data()),
           static_cast<std::streamsize>(o.image.size()));
  put<std::uint64_t>(os, o.lidar.size());
  os.write(reinterpret_cast<const char*>(o.lidar.data()),
           static_cast<std::streamsize>(o.lidar.size() * sizeof(float)));
  put<float>(os, o.speed_norm);
}

sim::ObsPtr get_obs(std::istream& is) {
  auto o = std::make_shared<sim::Observation>();
  o->image.resize(get<std::uint64_t>(is));
  is.read(reinterpret_cast<char*>(o->image.data()),
          static_cast<std::streamsize>(o->image.size()));
  o->lidar.resize(get<std::uint64_t>(is));
  is.read(reinterpret_cast<char*>(o->lidar.data()),
          static_cast<std::streamsize>(o->lidar.size() * sizeof(float)));
  o->speed_norm = get<float>(is);
  return o;
}

}  // namespace

void ReplayBuffer::save(std::ostream& os) const {
  // observation table first (deduplicated by pointer identity)
  std::unordered_map<const sim::Observation*, std::uint64_t> ids;
  std::vector<const sim::Observation*> uniq;
  auto intern = [&](const sim::ObsPtr& p) {
    auto [it, fresh] = ids.try_emplace(p.get(), uniq.size());
    if (fresh) uniq.push_back(p.get());
    return it->second;
  };
  std::vector<std::uint64_t> refs;
  for (const auto& part : parts_)
    for (const Transition& t : part) {
      refs.push_back(intern(t.obs));
      refs.push_back(intern(t.next_obs));
    }
  os.write("RPLB", 4);
  put<std::int32_t>(os, capacity_);
  put<std::uint64_t>(os, uniq.size());
  for (const sim::Observation* o : uniq) put_obs(os, *o);
  size_t ref_i = 0;
  for (const auto& part : parts_) {
    put<std::uint64_t>(os, part.size());
    for (const Transition& t : part) {
      put<std::uint64_t>(os, refs[ref_i++]);
      put<std::uint64_t>(os, refs[ref_i++]);
      put<float>(os, t.action_executed.steering);
      put<float>(os, t.action_executed.speed);
      put<float>(os, t.action_expert.steering);
      put<float>(os, t.action_expert.speed);
      put<float>(os, t.reward);
      put<std::uint8_t>(os, t.done);
      put<std::uint8_t>(os, static_cast<std::uint8_t>(t.fsm_state));
      put<std::uint8_t>(os, t.intervention);
      put<std::uint8_t>(os, t.phase1);
    }
  }
}

void ReplayBuffer::load(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "RPLB", 4) != 0)
    throw IoError("replay dump: bad magic");
  capacity_ = get<std::int32_t>(is);
  const std::uint64_t n_obs = get<std::uint64_t>(is);
  std::vector<sim::ObsPtr> table(n_obs);
  for (auto& p : table) p = get_obs(is);
  total_ = 0;
  for (auto& part : parts_) {
    part.clear();
    const std::uint64_t n = get<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < n; ++i) {
      Transition t;
      t.obs = table.at(get<std::uint64_t>(is));
      t.next_obs = table.at(get<std::uint64_t>(is));
      t.action_executed.steering = get<float>(is);
      t.action_executed.speed = get<float>(is);
      t.action_expert.steering = get<float>(is);
      t.action_expert.speed = get<float>(is);
      t.reward = get<float>(is);
      t.done = get<std::uint8_t>(is);
      t.fsm_state = static_cast<FsmState>(get<std::uint8_t>(is));
      t.intervention = get<std::uint8_t>(is);
      t.phase1 = get<std::uint8_t>(is);
      part.push_back(std::move(t));
      ++total_;
    }
  }
  if (!is) throw IoError("replay dump: truncated");
}

}  // namespace dal::expert

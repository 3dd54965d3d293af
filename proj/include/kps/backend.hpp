#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "kps/hash.hpp"
#include "kps/rng.hpp"
#include "kps/runtime.hpp"

namespace kps {

// Identifies one state object within a subtask. state_id disambiguates
// multiple states of one operator (e.g. the two sides of a join).
struct StateKey {
  std::string partition_key;
  std::uint32_t state_id = 0;

  bool operator==(const StateKey& o) const {
    return state_id == o.state_id && partition_key == o.partition_key;
  }
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    return static_cast<std::size_t>(keyed_hash(k.partition_key, 0x5157ull + k.state_id));
  }
};

struct LatencyDist {
  enum class Kind { Fixed, Uniform, Lognormal };
  Kind kind = Kind::Fixed;
  // Fixed: a = value (ms). Uniform: [a, b] ms. Lognormal: mu=a, sigma=b (ms scale).
  double a = 0.0;
  double b = 0.0;

  static LatencyDist fixed(double ms) { return {Kind::Fixed, ms, 0.0}; }
  static LatencyDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static LatencyDist lognormal(double mu, double sigma) { return {Kind::Lognormal, mu, sigma}; }

  Nanos sample(Rng& rng) const {
    switch (kind) {
      case Kind::Fixed:
        return from_ms(a);
      case Kind::Uniform:
        return from_ms(rng.uniform(a, b));
      case Kind::Lognormal:
        return from_ms(rng.lognormal(a, b));
    }
    return 0;
  }
};

// Emulates a local-disk or disaggregated key-value store: an in-memory map
// plus injected service latency and a bounded number of in-service I/Os.
struct BackendProfile {
  LatencyDist read_latency = LatencyDist::fixed(0.5);
  LatencyDist write_latency = LatencyDist::fixed(0.5);
  bool absent_key_fastpath = true;
  double fastpath_latency_ms = 0.05;  // bloom-filter-style quick "not found"
  int max_concurrent_ios = 8;
  std::uint64_t seed = 1;
};

class BackendShutdown : public std::runtime_error {
 public:
  BackendShutdown() : std::runtime_error("backend shut down") {}
};

class SimBackend {
 public:
  SimBackend(Runtime& rt, BackendProfile profile)
      : rt_(rt),
        mon_(rt.make_monitor()),
        profile_(profile),
        rng_(Rng(profile.seed).fork(0xBACC)) {}

  // Blocks the calling worker for a sampled read latency (or the fastpath
  // latency when the key is absent and the fastpath is enabled).
  std::optional<std::string> get(const StateKey& key) {
    Nanos delay;
    std::optional<std::string> hit;
    {
      MonitorLock lk(*mon_);
      acquire_slot_locked();
      auto it = map_.find(key);
      if (it != map_.end()) {
        hit = it->second;
        delay = read_latency_.sample(rng_);
      } else if (profile_.absent_key_fastpath) {
        delay = from_ms(profile_.fastpath_latency_ms);
      } else {
        delay = read_latency_.sample(rng_);
      }
    }
    rt_.sleep_for(delay);
    {
      MonitorLock lk(*mon_);
      release_slot_locked();
      ++gets_;
    }
    return hit;
  }

  void put(const StateKey& key, std::string value) {
    Nanos delay;
    {
      MonitorLock lk(*mon_);
      acquire_slot_locked();
      delay = profile_.write_latency.sample(rng_);
    }
    rt_.sleep_for(delay);
    {
      MonitorLock lk(*mon_);
      map_[key] = std::move(value);
      release_slot_locked();
      ++puts_;
    }
  }

  bool contains(const StateKey& key) {
    MonitorLock lk(*mon_);
    return map_.find(key) != map_.end();
  }

  std::size_t size() {
    MonitorLock lk(*mon_);
    return map_.size();
  }

  std::uint64_t get_count() {
    MonitorLock lk(*mon_);
    return gets_;
  }
  std::uint64_t put_count() {
    MonitorLock lk(*mon_);
    return puts_;
  }

  // Zero-latency seeding for warm starts; not an I/O path.
  void preload(const StateKey& key, std::string value) {
    MonitorLock lk(*mon_);
    map_[key] = std::move(value);
  }

  // Scenario hook: swap the read latency at runtime.
  void set_read_latency(LatencyDist d) {
    MonitorLock lk(*mon_);
    read_latency_ = d;
  }

  void shutdown() {
    MonitorLock lk(*mon_);
    shutdown_ = true;
    mon_->notify_all();
  }

  // Visits every entry in unspecified order, under the backend's exclusion.
  void for_each(const std::function<void(const StateKey&, const std::string&)>& fn) {
    MonitorLock lk(*mon_);
    for (const auto& [k, v] : map_) fn(k, v);
  }

  void dump(const std::string& path);
  void load(const std::string& path);

 private:
  void acquire_slot_locked() {
    if (shutdown_) throw BackendShutdown();
    while (in_service_ >= profile_.max_concurrent_ios) {
      mon_->wait();
      if (shutdown_) throw BackendShutdown();
    }
    ++in_service_;
  }

  void release_slot_locked() {
    --in_service_;
    mon_->notify_all();
  }

  Runtime& rt_;
  std::unique_ptr<Monitor> mon_;
  BackendProfile profile_;
  LatencyDist read_latency_ = profile_.read_latency;
  Rng rng_;
  std::unordered_map<StateKey, std::string, StateKeyHash> map_;
  int in_service_ = 0;
  bool shutdown_ = false;
  std::uint64_t gets_ = 0;
  std::uint64_t puts_ = 0;
};

}  // namespace kps

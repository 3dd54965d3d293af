#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>

#include "kps/tuple.hpp"

namespace kps {

// Two-stage hints buffer: per-key deduplicated hints, either unprocessed
// (no fetch issued yet) or in-flight (asynchronous fetch running). A key is
// in at most one stage, and its stored event time is the max over all hints
// received while buffered.
class HintsBuffer {
 public:
  explicit HintsBuffer(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  enum class Admit { Inserted, RaisedUnprocessed, RaisedInFlight, DroppedFull };

  struct Entry {
    std::string key;
    std::int64_t event_time_ms;
    int candidate;
  };

  Admit admit(const std::string& key, std::int64_t t, int candidate) {
    if (auto it = unprocessed_.find(key); it != unprocessed_.end()) {
      raise_unprocessed(it, t);
      return Admit::RaisedUnprocessed;
    }
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      it->second.event_time_ms = std::max(it->second.event_time_ms, t);
      return Admit::RaisedInFlight;
    }
    if (unprocessed_.size() + in_flight_.size() >= capacity_) {
      // Overflow: the unprocessed entry with the smallest event time has had
      // the most slack consumed already, so it is the most likely stale one.
      if (order_.empty()) return Admit::DroppedFull;
      auto victim = order_.begin();
      unprocessed_.erase(victim->second);
      order_.erase(victim);
    }
    auto [it, ok] = unprocessed_.emplace(key, Meta{t, candidate, {}});
    (void)ok;
    it->second.order_it = order_.emplace(OrderKey{t, ++seq_}, key).first;
    return Admit::Inserted;
  }

  // Soonest-needed first: the unprocessed entry with the smallest event time
  // moves to in-flight.
  std::optional<Entry> pop_earliest_to_in_flight() {
    if (order_.empty()) return std::nullopt;
    auto first = order_.begin();
    std::string key = first->second;
    auto it = unprocessed_.find(key);
    Entry out{key, it->second.event_time_ms, it->second.candidate};
    order_.erase(first);
    unprocessed_.erase(it);
    in_flight_.emplace(out.key, InFlight{out.event_time_ms, out.candidate});
    return out;
  }

  // Completion reads the (possibly raised) timestamp and removes the key.
  std::optional<Entry> complete_in_flight(const std::string& key) {
    auto it = in_flight_.find(key);
    if (it == in_flight_.end()) return std::nullopt;
    Entry out{key, it->second.event_time_ms, it->second.candidate};
    in_flight_.erase(it);
    return out;
  }

  // Data arrived and fetched synchronously; a pending hint for the key is moot.
  bool erase_unprocessed(const std::string& key) {
    auto it = unprocessed_.find(key);
    if (it == unprocessed_.end()) return false;
    order_.erase(it->second.order_it);
    unprocessed_.erase(it);
    return true;
  }

  bool in_flight(const std::string& key) const { return in_flight_.count(key) != 0; }
  bool buffered(const std::string& key) const {
    return unprocessed_.count(key) != 0 || in_flight_.count(key) != 0;
  }
  std::size_t unprocessed_size() const { return unprocessed_.size(); }
  std::size_t in_flight_size() const { return in_flight_.size(); }
  std::size_t size() const { return unprocessed_.size() + in_flight_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  struct OrderKey {
    std::int64_t t;
    std::uint64_t seq;
    bool operator<(const OrderKey& o) const { return t != o.t ? t < o.t : seq < o.seq; }
  };
  using OrderMap = std::map<OrderKey, std::string>;

  struct Meta {
    std::int64_t event_time_ms;
    int candidate;
    OrderMap::iterator order_it;
  };
  struct InFlight {
    std::int64_t event_time_ms;
    int candidate;
  };

  void raise_unprocessed(std::unordered_map<std::string, Meta>::iterator it, std::int64_t t) {
    if (t <= it->second.event_time_ms) return;
    order_.erase(it->second.order_it);
    it->second.event_time_ms = t;
    it->second.order_it = order_.emplace(OrderKey{t, ++seq_}, it->first).first;
  }

  std::size_t capacity_;
  std::unordered_map<std::string, Meta> unprocessed_;
  std::unordered_map<std::string, InFlight> in_flight_;
  OrderMap order_;  // (event_time, seq) -> key, for earliest-first selection
  std::uint64_t seq_ = 0;
};

}  // namespace kps

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kps/tac.hpp"

namespace kps {

// Policy-agnostic cache surface used by the stateful subtask. TAC and the
// LRU/Clock baselines sit behind it, sharing the backend and the staged
// writeback mechanism, so measured deltas isolate the eviction policy.
// Externally synchronized by the owning subtask.
class StateCache {
 public:
  virtual ~StateCache() = default;

  virtual bool resident(const StateKey& key) const = 0;
  // Reinstates entries staged for writeback; does not touch the policy order.
  virtual std::optional<std::string> get(const StateKey& key) = 0;
  // Policy bookkeeping for a data access that hit.
  virtual void on_access(const StateKey& key, std::int64_t event_time_ms) = 0;
  // Anticipated future use (hints); only the timestamp-aware policy reacts.
  virtual void on_future_hint(const StateKey& key, std::int64_t event_time_ms) { (void)key; (void)event_time_ms; }
  virtual void insert(const StateKey& key, std::string value, std::int64_t event_time_ms,
                      Origin origin, bool dirty, int candidate) = 0;
  // Read-modify-write of a resident entry; false if absent.
  virtual bool write(const StateKey& key, std::string value, std::int64_t event_time_ms) = 0;

  virtual std::optional<WritebackJob> pop_writeback() = 0;
  virtual std::optional<FinalEviction> complete_writeback(const StateKey& key,
                                                          std::uint64_t version, bool ok) = 0;
  virtual std::vector<WritebackJob> dirty_snapshot() const = 0;
  virtual bool mark_clean(const StateKey& key, std::uint64_t version) = 0;

  virtual std::vector<TacVictim> take_victims() = 0;
  virtual std::size_t size() const = 0;
  virtual std::size_t eviction_buffer_size() const = 0;
  virtual std::size_t eviction_buffer_bound() const = 0;

  struct Meta {
    Origin origin;
    bool used;
    bool dirty;
  };
  virtual std::optional<Meta> peek(const StateKey& key) const = 0;
  virtual std::vector<std::pair<StateKey, Meta>> entries() const = 0;
};

class TacCache final : public StateCache {
 public:
  explicit TacCache(TacOptions opt) : tac_(opt) {}

  TimestampAwareCache& tac() { return tac_; }

  bool resident(const StateKey& key) const override { return tac_.resident(key); }
  std::optional<std::string> get(const StateKey& key) override { return tac_.get(key); }
  void on_access(const StateKey& key, std::int64_t t) override { tac_.touch_access(key, t); }
  void on_future_hint(const StateKey& key, std::int64_t t) override { tac_.touch_future(key, t); }
  void insert(const StateKey& key, std::string value, std::int64_t t, Origin origin, bool dirty,
              int candidate) override {
    tac_.insert(key, std::move(value), t, origin, dirty, candidate);
  }
  bool write(const StateKey& key, std::string value, std::int64_t t) override {
    return tac_.write(key, std::move(value), t);
  }
  std::optional<WritebackJob> pop_writeback() override { return tac_.pop_writeback(); }
  std::optional<FinalEviction> complete_writeback(const StateKey& key, std::uint64_t version,
                                                  bool ok) override {
    return tac_.complete_writeback(key, version, ok);
  }
  std::vector<WritebackJob> dirty_snapshot() const override { return tac_.dirty_snapshot(); }
  bool mark_clean(const StateKey& key, std::uint64_t version) override {
    return tac_.mark_clean(key, version);
  }
  std::vector<TacVictim> take_victims() override { return tac_.take_victims(); }
  std::size_t size() const override { return tac_.size(); }
  std::size_t eviction_buffer_size() const override { return tac_.eviction_buffer_size(); }
  std::size_t eviction_buffer_bound() const override {
    return tac_.options().eviction_buffer_capacity;
  }
  std::optional<Meta> peek(const StateKey& key) const override {
    auto m = tac_.meta(key);
    if (!m) return std::nullopt;
    return Meta{m->origin, m->used, m->dirty};
  }
  std::vector<std::pair<StateKey, Meta>> entries() const override {
    std::vector<std::pair<StateKey, Meta>> out;
    for (const auto& e : tac_.all_entries())
      out.emplace_back(e.key, Meta{e.origin, e.used, e.dirty});
    return out;
  }

 private:
  TimestampAwareCache tac_;
};

enum class CachePolicy { Tac, Lru, Clock };

std::unique_ptr<StateCache> make_cache(CachePolicy policy, std::size_t capacity,
                                       std::size_t eviction_buffer_capacity);

}  // namespace kps

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kps/metrics.hpp"
#include "kps/runtime.hpp"

namespace kps {

// Centralized coordinator: holds each stateful operator's ordered candidate
// lookahead list, activates prefetching on demand, and services switch and
// discard requests from the prefetch managers. Runs in-process; methods are
// short, lock-protected, and never block, so managers may call them from
// inside their own exclusion regions.
class PrefetchController {
 public:
  explicit PrefetchController(Runtime& rt, MetricsRegistry& metrics)
      : rt_(rt), metrics_(metrics) {}

  // Candidates in plan order (closest to the source first).
  void register_stateful(int stateful_op, std::vector<int> candidates) {
    std::lock_guard<std::mutex> lk(mu_);
    State st;
    st.candidates = std::move(candidates);
    states_.emplace(stateful_op, std::move(st));
    for (int c : states_.at(stateful_op).candidates) emitting_.try_emplace(c, false);
  }

  // Cold misses observed: activate the first non-discarded candidate.
  void request_activation(int stateful_op) {
    std::lock_guard<std::mutex> lk(mu_);
    State& st = states_.at(stateful_op);
    if (st.active) return;  // idempotent
    activate_first_locked(stateful_op, st);
  }

  // Distribution mismatch: drop the active candidate and everything upstream
  // of it, then move to the next remaining one.
  void request_discard_and_advance(int stateful_op) {
    std::lock_guard<std::mutex> lk(mu_);
    State& st = states_.at(stateful_op);
    if (!st.active) return;
    int old = *st.active;
    for (int c : st.candidates) {
      st.discarded.insert(c);
      if (c == old) break;
    }
    set_emitting_locked(old, false);
    st.active.reset();
    metrics_.event(rt_.now(), "discard_lookahead", old);
    activate_first_locked(stateful_op, st);
  }

  // Slack-based reselection; nothing is discarded. Make-before-break: the new
  // extractor starts before the old one stops, the hints buffer absorbs the
  // brief duplication.
  void request_retarget(int stateful_op, int candidate) {
    std::lock_guard<std::mutex> lk(mu_);
    State& st = states_.at(stateful_op);
    if (st.discarded.count(candidate)) return;
    bool listed = false;
    for (int c : st.candidates) listed |= (c == candidate);
    if (!listed) return;
    if (st.active && *st.active == candidate) return;
    set_emitting_locked(candidate, true);
    if (st.active) set_emitting_locked(*st.active, false);
    st.active = candidate;
    metrics_.event(rt_.now(), "active_lookahead", candidate);
  }

  // Hot-path check by hint extractors: one atomic load.
  bool emitting(int candidate_op) const {
    auto it = emitting_.find(candidate_op);
    return it != emitting_.end() && it->second.load(std::memory_order_relaxed);
  }

  std::optional<int> active(int stateful_op) {
    std::lock_guard<std::mutex> lk(mu_);
    return states_.at(stateful_op).active;
  }

  // Non-discarded candidates in plan order.
  std::vector<int> remaining_candidates(int stateful_op) {
    std::lock_guard<std::mutex> lk(mu_);
    State& st = states_.at(stateful_op);
    std::vector<int> out;
    for (int c : st.candidates)
      if (!st.discarded.count(c)) out.push_back(c);
    return out;
  }

  std::vector<int> all_candidates(int stateful_op) {
    std::lock_guard<std::mutex> lk(mu_);
    return states_.at(stateful_op).candidates;
  }

  bool prefetching_disabled(int stateful_op) {
    std::lock_guard<std::mutex> lk(mu_);
    State& st = states_.at(stateful_op);
    return !st.active && remaining_count_locked(st) == 0;
  }

 private:
  struct State {
    std::vector<int> candidates;  // plan order
    std::optional<int> active;
    std::set<int> discarded;
  };

  std::size_t remaining_count_locked(const State& st) const {
    std::size_t n = 0;
    for (int c : st.candidates)
      if (!st.discarded.count(c)) ++n;
    return n;
  }

  void activate_first_locked(int stateful_op, State& st) {
    (void)stateful_op;
    for (int c : st.candidates) {
      if (st.discarded.count(c)) continue;
      st.active = c;
      set_emitting_locked(c, true);
      metrics_.event(rt_.now(), "active_lookahead", c);
      return;
    }
    metrics_.event(rt_.now(), "prefetching_disabled", -1);
  }

  void set_emitting_locked(int op, bool value) {
    emitting_.at(op).store(value, std::memory_order_relaxed);
  }

  Runtime& rt_;
  MetricsRegistry& metrics_;
  mutable std::mutex mu_;
  std::map<int, State> states_;
  std::map<int, std::atomic<bool>> emitting_;
};

}  // namespace kps

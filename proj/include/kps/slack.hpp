#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "kps/runtime.hpp"

namespace kps {

// Fixed-size ring reservoir with exact percentiles over its contents.
class Reservoir {
 public:
  explicit Reservoir(std::size_t capacity = 512) : cap_(capacity ? capacity : 1) {}

  void push(double v) {
    if (ring_.size() < cap_) {
      ring_.push_back(v);
    } else {
      ring_[next_] = v;
      next_ = (next_ + 1) % cap_;
    }
    ++total_;
  }

  std::size_t count() const { return ring_.size(); }
  std::uint64_t total() const { return total_; }

  // Exact percentile over the reservoir (nearest-rank); p in [0, 1].
  double percentile(double p) const {
    if (ring_.empty()) return 0.0;
    std::vector<double> sorted(ring_);
    std::sort(sorted.begin(), sorted.end());
    double rank = p * static_cast<double>(sorted.size() - 1);
    std::size_t idx = static_cast<std::size_t>(rank + 0.5);
    return sorted[std::min(idx, sorted.size() - 1)];
  }

 private:
  std::size_t cap_;
  std::vector<double> ring_;
  std::size_t next_ = 0;
  std::uint64_t total_ = 0;
};

// Candidate slack visible to the selection rule, plan order (source side first).
struct CandidateSlack {
  int op = -1;          // operator index of the candidate
  double p99_g_ms = 0;  // p99 of measured slack G for this candidate
  bool enough_samples = false;
};

struct SelectionResult {
  int op = -1;             // chosen lookahead
  bool satisfied = false;  // false: nothing met the rule, fell back to earliest
};

// The latest candidate (closest to the stateful operator) whose p99 slack
// still covers the p99 state-fetch latency plus a safety margin. When no
// candidate qualifies, falls back to the earliest remaining one so hints keep
// flowing; callers surface a diagnostic.
inline std::optional<SelectionResult> select_lookahead(
    const std::vector<CandidateSlack>& candidates_plan_order, double p99_f_ms, double gamma_ms) {
  std::optional<SelectionResult> best;
  for (const auto& c : candidates_plan_order) {
    if (!c.enough_samples) continue;
    if (c.p99_g_ms >= p99_f_ms + gamma_ms) best = SelectionResult{c.op, true};
  }
  if (best) return best;
  for (const auto& c : candidates_plan_order) {
    if (c.enough_samples) return SelectionResult{c.op, false};
  }
  return std::nullopt;  // no measurable candidate yet
}

// Marker-round bookkeeping: a round completes when the data-channel copies
// from every input channel and one hint-channel copy per remaining candidate
// have all arrived; G_i = t_data - t_hint(L_i) per candidate.
class MarkerRounds {
 public:
  MarkerRounds(std::size_t expected_data_copies, std::size_t horizon = 64)
      : expected_data_(expected_data_copies ? expected_data_copies : 1), horizon_(horizon) {}

  struct Completed {
    std::uint64_t round;
    std::vector<std::pair<int, Nanos>> slack_per_candidate;  // (candidate op, G)
  };

  void on_hint_copy(std::uint64_t round, int origin, Nanos at) {
    auto& r = rounds_[round];
    // Per candidate, one logical copy per emitting subtask; keep the last.
    auto [it, inserted] = r.hint_arrival.emplace(origin, at);
    if (!inserted) it->second = std::max(it->second, at);
    ++r.hint_copies[origin];
  }

  void on_data_copy(std::uint64_t round, Nanos at) {
    auto& r = rounds_[round];
    ++r.data_copies;
    r.data_arrival = std::max(r.data_arrival, at);
  }

  // Completes the round if every expected copy arrived. expected_hint_copies
  // maps candidate op -> number of hint channels from that candidate.
  std::optional<Completed> try_complete(std::uint64_t round,
                                        const std::map<int, std::size_t>& expected_hint_copies) {
    auto it = rounds_.find(round);
    if (it == rounds_.end()) return std::nullopt;
    Round& r = it->second;
    if (r.data_copies < expected_data_) return std::nullopt;
    for (const auto& [op, copies] : expected_hint_copies) {
      auto hit = r.hint_copies.find(op);
      if (hit == r.hint_copies.end() || hit->second < copies) return std::nullopt;
    }
    Completed done;
    done.round = round;
    for (const auto& [op, copies] : expected_hint_copies) {
      (void)copies;
      done.slack_per_candidate.emplace_back(op, r.data_arrival - r.hint_arrival[op]);
    }
    rounds_.erase(it);
    return done;
  }

  // Drops rounds older than the horizon; returns how many were incomplete.
  std::size_t discard_stale(std::uint64_t current_round) {
    std::size_t dropped = 0;
    for (auto it = rounds_.begin(); it != rounds_.end();) {
      if (it->first + horizon_ < current_round) {
        it = rounds_.erase(it);
        ++dropped;
      } else {
        ++it;
      }
    }
    return dropped;
  }

  std::size_t pending() const { return rounds_.size(); }

 private:
  struct Round {
    std::size_t data_copies = 0;
    Nanos data_arrival = 0;
    std::map<int, Nanos> hint_arrival;       // candidate -> last copy arrival
    std::map<int, std::size_t> hint_copies;  // candidate -> copies seen
  };

  std::size_t expected_data_;
  std::size_t horizon_;
  std::map<std::uint64_t, Round> rounds_;
};

}  // namespace kps

#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kps/backend.hpp"
#include "kps/cache.hpp"
#include "kps/channel.hpp"
#include "kps/controller.hpp"
#include "kps/hints.hpp"
#include "kps/metrics.hpp"
#include "kps/slack.hpp"
#include "kps/tuple.hpp"

namespace kps {

enum class Mode { CacheLru, CacheClock, AsyncIo, KeyedPrefetching };

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& name);

struct ServiceOptions {
  Mode mode = Mode::KeyedPrefetching;
  CachePolicy policy = CachePolicy::Tac;
  std::size_t cache_capacity = 1024;
  std::size_t eviction_buffer_capacity = 0;  // 0 -> capacity/16
  int pool_size = 4;
  std::size_t hints_capacity = 4096;
  double gamma_ms = 5.0;
  std::size_t min_samples = 30;
  std::size_t reservoir_size = 512;
  double miss_threshold = 0.0;
  bool watermark_drop = false;
  std::int64_t lateness_threshold_ms = 0;
  std::int64_t activation_cold_miss_trigger = 1;
  std::size_t marker_horizon = 64;
};

// Per-stateful-subtask state layer: the cache (TAC or a baseline policy), the
// two-stage hints buffer, the asynchronous I/O worker pool, slack and
// prefetch-miss statistics, and the switch requests toward the controller.
//
// One operator worker plus pool_size I/O workers share this object; all
// mutation happens under one monitor, with backend I/O strictly outside it.
class StateService {
 public:
  struct CandidateWiring {
    int op = -1;
    std::size_t hint_channels = 0;  // marker copies expected per round
  };

  // worker_gate is the owning operator worker's input gate: the completion
  // channel joins it so the worker can select over all inputs at once.
  StateService(Runtime& rt, SimBackend& backend, MetricsRegistry& metrics, ServiceOptions opt,
               int stateful_op, const std::string& metrics_prefix,
               std::size_t data_marker_copies, std::vector<std::uint32_t> all_sids,
               std::vector<std::uint32_t> hinted_sids, std::vector<CandidateWiring> candidates,
               PrefetchController* controller, InputGate& worker_gate);

  // --- operator worker: data path ---
  // Blocking read with the full arrival protocol: cache hit, wait on an
  // in-flight prefetch, or synchronous fetch on a cold miss.
  std::string read_state(const std::string& key, std::uint32_t sid, std::int64_t event_time_ms);
  void write_state(const std::string& key, std::uint32_t sid, std::string value,
                   std::int64_t event_time_ms);

  // --- operator worker: asynchronous mode ---
  // True: every declared state id is resident, process now. False: a fetch
  // was queued; park the tuple and continue with other keys.
  bool async_ensure(const std::string& key, std::int64_t event_time_ms);
  Channel<Completion>& completion_channel() { return *completion_; }

  // --- operator worker: hint side channel ---
  void on_hint(const PrefetchHint& hint);
  void on_hint_marker(const Marker& m);
  void on_data_marker(const Marker& m);

  // --- pool ---
  void io_worker_loop();

  // Quiesce after the inputs drained: waits out in-flight fetches, drains
  // writebacks, stops the pool, flushes dirty state, sweeps accounting.
  void finish();

  std::size_t hints_buffer_peak() const { return hints_buffer_peak_; }

 private:
  struct WorkItem {
    enum class Kind { Wait, Exit, Writeback, Prefetch, AsyncFetch };
    Kind kind = Kind::Wait;
    WritebackJob job;
    HintsBuffer::Entry hint;
    std::vector<std::uint32_t> fetch_sids;
    std::string key;
    std::int64_t event_time_ms = 0;
  };

  WorkItem pick_work_locked();
  void execute_writeback(const WritebackJob& job);
  void execute_prefetch(const WorkItem& item);
  void execute_async_fetch(const WorkItem& item);

  // Insert + victim accounting + eviction-buffer bound upkeep. Lock held;
  // may release it around backend writes when the buffer is over its bound.
  void admit_locked(const StateKey& ck, std::string value, std::int64_t t, Origin origin,
                    bool dirty, int candidate);
  void drain_victims_locked();
  void enforce_buffer_bound_locked();
  void account_final_locked(Origin origin, bool used, int candidate);
  void note_first_use_locked(const StateKey& ck);
  void evaluate_lookahead_locked();
  Nanos timed_backend_get(const StateKey& ck, std::optional<std::string>* out);

  Runtime& rt_;
  SimBackend& backend_;
  MetricsRegistry& metrics_;
  ServiceOptions opt_;
  int stateful_op_;
  PrefetchController* controller_;

  std::unique_ptr<Monitor> mon_;
  std::unique_ptr<StateCache> cache_;
  HintsBuffer buf_;
  std::unique_ptr<Channel<Completion>> completion_;

  std::vector<std::uint32_t> all_sids_;
  std::vector<std::uint32_t> hinted_sids_;
  std::vector<CandidateWiring> candidates_;
  std::map<int, std::size_t> expected_hint_copies_;

  MarkerRounds rounds_;
  std::map<int, Reservoir> slack_;  // candidate op -> G samples (ms)
  Reservoir fetch_latency_;         // F samples (ms), all backend reads here

  std::deque<std::pair<std::string, std::int64_t>> fetch_queue_;  // async mode
  std::int64_t watermark_ms_ = std::numeric_limits<std::int64_t>::min();

  // prefetch-miss window (since the last evaluation), active candidate only
  std::int64_t window_prefetched_ = 0;
  std::int64_t window_unused_ = 0;

  std::int64_t cold_misses_seen_ = 0;
  std::size_t hints_buffer_peak_ = 0;
  int workers_running_ = 0;
  int async_running_ = 0;
  bool draining_ = false;
  bool shutdown_ = false;

  // counters (registry-backed)
  std::atomic<std::int64_t>& c_hits_;
  std::atomic<std::int64_t>& c_cold_;
  std::atomic<std::int64_t>& c_late_;
  std::atomic<std::int64_t>& c_sync_fetches_;
  std::atomic<std::int64_t>& c_async_fetches_;
  std::atomic<std::int64_t>& c_prefetched_total_;
  std::atomic<std::int64_t>& c_prefetch_used_;
  std::atomic<std::int64_t>& c_prefetch_unused_;
  std::atomic<std::int64_t>& c_prefetch_unused_residual_;
  std::atomic<std::int64_t>& c_hints_received_;
  std::atomic<std::int64_t>& c_hints_dropped_late_;
  std::atomic<std::int64_t>& c_hints_dropped_full_;
  std::atomic<std::int64_t>& c_writebacks_;
  std::atomic<std::int64_t>& c_flush_writes_;
  std::atomic<std::int64_t>& c_incomplete_rounds_;
  std::atomic<std::int64_t>& c_no_candidate_satisfies_;
};

}  // namespace kps

#include "kps/state_service.hpp"

#include <algorithm>
#include <cassert>

namespace kps {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::CacheLru:
      return "cache-lru";
    case Mode::CacheClock:
      return "cache-clock";
    case Mode::AsyncIo:
      return "async-io";
    case Mode::KeyedPrefetching:
      return "keyed-prefetching";
  }
  return "?";
}

std::optional<Mode> parse_mode(const std::string& name) {
  if (name == "cache-lru") return Mode::CacheLru;
  if (name == "cache-clock") return Mode::CacheClock;
  if (name == "async-io") return Mode::AsyncIo;
  if (name == "keyed-prefetching") return Mode::KeyedPrefetching;
  return std::nullopt;
}

StateService::StateService(Runtime& rt, SimBackend& backend, MetricsRegistry& metrics,
                           ServiceOptions opt, int stateful_op, const std::string& metrics_prefix,
                           std::size_t data_marker_copies, std::vector<std::uint32_t> all_sids,
                           std::vector<std::uint32_t> hinted_sids,
                           std::vector<CandidateWiring> candidates,
                           PrefetchController* controller, InputGate& worker_gate)
    : rt_(rt),
      backend_(backend),
      metrics_(metrics),
      opt_(opt),
      stateful_op_(stateful_op),
      controller_(controller),
      mon_(rt.make_monitor()),
      cache_(make_cache(opt.policy, opt.cache_capacity, opt.eviction_buffer_capacity)),
      buf_(opt.hints_capacity),
      completion_(std::make_unique<Channel<Completion>>(rt, worker_gate, kUnboundedChannel, 0)),
      all_sids_(std::move(all_sids)),
      hinted_sids_(std::move(hinted_sids)),
      candidates_(std::move(candidates)),
      rounds_(data_marker_copies, opt.marker_horizon),
      fetch_latency_(opt.reservoir_size),
      c_hits_(metrics.counter(metrics_prefix + ".hits")),
      c_cold_(metrics.counter(metrics_prefix + ".cold_misses")),
      c_late_(metrics.counter(metrics_prefix + ".late_hint_misses")),
      c_sync_fetches_(metrics.counter(metrics_prefix + ".sync_fetches")),
      c_async_fetches_(metrics.counter(metrics_prefix + ".async_fetches")),
      c_prefetched_total_(metrics.counter(metrics_prefix + ".prefetched_total")),
      c_prefetch_used_(metrics.counter(metrics_prefix + ".prefetch_used")),
      c_prefetch_unused_(metrics.counter(metrics_prefix + ".prefetch_unused")),
      c_prefetch_unused_residual_(metrics.counter(metrics_prefix + ".prefetch_unused_residual")),
      c_hints_received_(metrics.counter(metrics_prefix + ".hints_received")),
      c_hints_dropped_late_(metrics.counter(metrics_prefix + ".hints_dropped_late")),
      c_hints_dropped_full_(metrics.counter(metrics_prefix + ".hints_dropped_full")),
      c_writebacks_(metrics.counter(metrics_prefix + ".writebacks")),
      c_flush_writes_(metrics.counter(metrics_prefix + ".flush_writes")),
      c_incomplete_rounds_(metrics.counter(metrics_prefix + ".incomplete_marker_rounds")),
      c_no_candidate_satisfies_(metrics.counter(metrics_prefix + ".no_candidate_satisfies")) {
  for (const auto& c : candidates_) {
    expected_hint_copies_[c.op] = c.hint_channels;
    slack_.emplace(c.op, Reservoir(opt_.reservoir_size));
  }
}

Nanos StateService::timed_backend_get(const StateKey& ck, std::optional<std::string>* out) {
  Nanos t0 = rt_.now();
  *out = backend_.get(ck);
  return rt_.now() - t0;
}

std::string StateService::read_state(const std::string& key, std::uint32_t sid,
                                     std::int64_t event_time_ms) {
  StateKey ck{key, sid};
  mon_->lock();
  watermark_ms_ = std::max(watermark_ms_, event_time_ms);
  bool counted_late = false;
  for (;;) {
    if (auto meta = cache_->peek(ck)) {
      (void)meta;
      note_first_use_locked(ck);
      auto value = cache_->get(ck);
      cache_->on_access(ck, event_time_ms);
      drain_victims_locked();
      enforce_buffer_bound_locked();
      c_hits_.fetch_add(1, std::memory_order_relaxed);
      std::string out = std::move(*value);
      mon_->unlock();
      return out;
    }
    bool hinted = std::find(hinted_sids_.begin(), hinted_sids_.end(), sid) != hinted_sids_.end();
    if (opt_.mode == Mode::KeyedPrefetching && hinted && buf_.in_flight(key)) {
      // A prefetch is already running for this key: wait on its completion
      // rather than duplicating the I/O.
      if (!counted_late) {
        c_late_.fetch_add(1, std::memory_order_relaxed);
        counted_late = true;
      }
      mon_->wait();
      continue;
    }
    break;
  }

  // Cold miss: synchronous fetch.
  c_cold_.fetch_add(1, std::memory_order_relaxed);
  ++cold_misses_seen_;
  if (controller_ && opt_.mode == Mode::KeyedPrefetching &&
      cold_misses_seen_ == opt_.activation_cold_miss_trigger)
    controller_->request_activation(stateful_op_);
  if (opt_.mode == Mode::KeyedPrefetching) buf_.erase_unprocessed(key);
  mon_->unlock();

  std::optional<std::string> fetched;
  Nanos took = timed_backend_get(ck, &fetched);

  mon_->lock();
  fetch_latency_.push(to_ms(took));
  c_sync_fetches_.fetch_add(1, std::memory_order_relaxed);
  std::string out;
  if (cache_->peek(ck)) {
    // A blind write landed while we were fetching; the cached value is newer.
    note_first_use_locked(ck);
    out = *cache_->get(ck);
    cache_->on_access(ck, event_time_ms);
  } else {
    out = fetched.value_or(std::string());
    admit_locked(ck, out, event_time_ms, Origin::Accessed, false, -1);
    cache_->on_access(ck, event_time_ms);
  }
  drain_victims_locked();
  enforce_buffer_bound_locked();
  mon_->unlock();
  return out;
}

void StateService::write_state(const std::string& key, std::uint32_t sid, std::string value,
                               std::int64_t event_time_ms) {
  StateKey ck{key, sid};
  MonitorLock lk(*mon_);
  watermark_ms_ = std::max(watermark_ms_, event_time_ms);
  if (cache_->peek(ck)) {
    note_first_use_locked(ck);
    cache_->write(ck, std::move(value), event_time_ms);
  } else {
    // Blind write: the state starts (or restarts) from this value; any
    // in-flight prefetch for the key skips its insert on completion.
    admit_locked(ck, std::move(value), event_time_ms, Origin::Accessed, true, -1);
  }
  drain_victims_locked();
  enforce_buffer_bound_locked();
}

bool StateService::async_ensure(const std::string& key, std::int64_t event_time_ms) {
  MonitorLock lk(*mon_);
  watermark_ms_ = std::max(watermark_ms_, event_time_ms);
  bool all_resident = true;
  for (std::uint32_t sid : all_sids_)
    all_resident &= cache_->peek(StateKey{key, sid}).has_value();
  if (all_resident) return true;
  c_cold_.fetch_add(1, std::memory_order_relaxed);
  fetch_queue_.emplace_back(key, event_time_ms);
  mon_->notify_all();
  return false;
}

void StateService::on_hint(const PrefetchHint& hint) {
  MonitorLock lk(*mon_);
  c_hints_received_.fetch_add(1, std::memory_order_relaxed);
  if (opt_.watermark_drop &&
      hint.event_time_ms < watermark_ms_ - opt_.lateness_threshold_ms) {
    // Older than the watermark minus the lateness threshold: the operator
    // would drop the record, so prefetching for it is wasted work.
    c_hints_dropped_late_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  bool all_resident = true;
  for (std::uint32_t sid : hinted_sids_)
    all_resident &= cache_->peek(StateKey{hint.key, sid}).has_value();
  if (all_resident) {
    // Already cached: just renew the predicted relevance.
    for (std::uint32_t sid : hinted_sids_)
      cache_->on_future_hint(StateKey{hint.key, sid}, hint.event_time_ms);
    drain_victims_locked();
    enforce_buffer_bound_locked();
    return;
  }
  auto admitted = buf_.admit(hint.key, hint.event_time_ms, hint.origin_op);
  hints_buffer_peak_ = std::max(hints_buffer_peak_, buf_.size());
  if (admitted == HintsBuffer::Admit::DroppedFull)
    c_hints_dropped_full_.fetch_add(1, std::memory_order_relaxed);
  else if (admitted == HintsBuffer::Admit::Inserted)
    mon_->notify_all();  // wake an I/O worker
}

void StateService::on_hint_marker(const Marker& m) {
  MonitorLock lk(*mon_);
  rounds_.on_hint_copy(m.round, m.origin_lookahead, rt_.now());
  if (auto done = rounds_.try_complete(m.round, expected_hint_copies_)) {
    for (auto& [op, g] : done->slack_per_candidate) slack_.at(op).push(to_ms(g));
    evaluate_lookahead_locked();
  }
}

void StateService::on_data_marker(const Marker& m) {
  MonitorLock lk(*mon_);
  rounds_.on_data_copy(m.round, rt_.now());
  if (auto done = rounds_.try_complete(m.round, expected_hint_copies_)) {
    for (auto& [op, g] : done->slack_per_candidate) slack_.at(op).push(to_ms(g));
    evaluate_lookahead_locked();
  }
  c_incomplete_rounds_.fetch_add(
      static_cast<std::int64_t>(rounds_.discard_stale(m.round)), std::memory_order_relaxed);
}

void StateService::evaluate_lookahead_locked() {
  if (!controller_ || opt_.mode != Mode::KeyedPrefetching) return;

  // Prefetch-miss window: with the 0% threshold any unused prefetch from the
  // active lookahead triggers a discard of it and everything upstream.
  if (window_prefetched_ > 0) {
    double ratio = static_cast<double>(window_unused_) / static_cast<double>(window_prefetched_);
    if (ratio > opt_.miss_threshold) controller_->request_discard_and_advance(stateful_op_);
  }
  window_prefetched_ = 0;
  window_unused_ = 0;

  if (fetch_latency_.count() < opt_.min_samples) return;
  auto remaining = controller_->remaining_candidates(stateful_op_);
  std::vector<CandidateSlack> cands;
  for (int op : remaining) {
    const Reservoir& g = slack_.at(op);
    cands.push_back({op, g.percentile(0.99), g.count() >= opt_.min_samples});
  }
  auto sel = select_lookahead(cands, fetch_latency_.percentile(0.99), opt_.gamma_ms);
  if (!sel) return;
  if (!sel->satisfied) c_no_candidate_satisfies_.fetch_add(1, std::memory_order_relaxed);
  auto active = controller_->active(stateful_op_);
  if (active && *active != sel->op) controller_->request_retarget(stateful_op_, sel->op);
}

StateService::WorkItem StateService::pick_work_locked() {
  WorkItem item;
  bool over = cache_->eviction_buffer_size() > cache_->eviction_buffer_bound();
  bool fetch_work = (opt_.mode == Mode::KeyedPrefetching && !draining_ &&
                     buf_.unprocessed_size() > 0) ||
                    !fetch_queue_.empty();
  if (over || (cache_->eviction_buffer_size() > 0 && !fetch_work)) {
    if (auto job = cache_->pop_writeback()) {
      item.kind = WorkItem::Kind::Writeback;
      item.job = std::move(*job);
      return item;
    }
  }
  if (opt_.mode == Mode::KeyedPrefetching && !draining_ && buf_.unprocessed_size() > 0) {
    auto entry = buf_.pop_earliest_to_in_flight();
    item.kind = WorkItem::Kind::Prefetch;
    item.hint = std::move(*entry);
    for (std::uint32_t sid : hinted_sids_)
      if (!cache_->peek(StateKey{item.hint.key, sid})) item.fetch_sids.push_back(sid);
    return item;
  }
  if (!fetch_queue_.empty()) {
    auto [key, t] = fetch_queue_.front();
    fetch_queue_.pop_front();
    item.kind = WorkItem::Kind::AsyncFetch;
    item.key = std::move(key);
    item.event_time_ms = t;
    for (std::uint32_t sid : all_sids_)
      if (!cache_->peek(StateKey{item.key, sid})) item.fetch_sids.push_back(sid);
    ++async_running_;
    return item;
  }
  if (shutdown_) {
    item.kind = WorkItem::Kind::Exit;
    return item;
  }
  item.kind = WorkItem::Kind::Wait;
  return item;
}

void StateService::io_worker_loop() {
  {
    MonitorLock lk(*mon_);
    ++workers_running_;
  }
  for (;;) {
    WorkItem item;
    {
      MonitorLock lk(*mon_);
      for (;;) {
        item = pick_work_locked();
        if (item.kind != WorkItem::Kind::Wait) break;
        mon_->wait();
      }
    }
    if (item.kind == WorkItem::Kind::Exit) break;
    switch (item.kind) {
      case WorkItem::Kind::Writeback:
        execute_writeback(item.job);
        break;
      case WorkItem::Kind::Prefetch:
        execute_prefetch(item);
        break;
      case WorkItem::Kind::AsyncFetch:
        execute_async_fetch(item);
        break;
      default:
        break;
    }
  }
  MonitorLock lk(*mon_);
  --workers_running_;
  mon_->notify_all();
}

void StateService::execute_writeback(const WritebackJob& job) {
  bool ok = true;
  try {
    backend_.put(job.key, job.value);
  } catch (const BackendShutdown&) {
    ok = false;
  }
  MonitorLock lk(*mon_);
  c_writebacks_.fetch_add(1, std::memory_order_relaxed);
  if (auto fin = cache_->complete_writeback(job.key, job.version, ok))
    account_final_locked(fin->origin, fin->used, fin->candidate);
  mon_->notify_all();
}

void StateService::execute_prefetch(const WorkItem& item) {
  std::vector<std::pair<std::uint32_t, std::string>> fetched;
  for (std::uint32_t sid : item.fetch_sids) {
    std::optional<std::string> value;
    Nanos took = timed_backend_get(StateKey{item.hint.key, sid}, &value);
    MonitorLock lk(*mon_);
    fetch_latency_.push(to_ms(took));
    // Absent key: stage an empty initial state so read-modify-write
    // operators start from it without a second fetch.
    fetched.emplace_back(sid, value.value_or(std::string()));
  }
  MonitorLock lk(*mon_);
  auto done = buf_.complete_in_flight(item.hint.key);
  std::int64_t ts = done ? done->event_time_ms : item.hint.event_time_ms;
  int candidate = done ? done->candidate : item.hint.candidate;
  for (auto& [sid, value] : fetched) {
    StateKey ck{item.hint.key, sid};
    c_prefetched_total_.fetch_add(1, std::memory_order_relaxed);
    auto active = controller_ ? controller_->active(stateful_op_) : std::nullopt;
    if (active && candidate == *active) ++window_prefetched_;
    if (cache_->peek(ck)) {
      // Raced with a blind write or sync fetch: that entry is the live one,
      // and the key has plainly been accessed already.
      c_prefetch_used_.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    admit_locked(ck, std::move(value), ts, Origin::Prefetched, false, candidate);
  }
  drain_victims_locked();
  enforce_buffer_bound_locked();
  mon_->notify_all();  // wake readers blocked on this in-flight key
}

void StateService::execute_async_fetch(const WorkItem& item) {
  std::vector<std::pair<std::uint32_t, std::string>> fetched;
  for (std::uint32_t sid : item.fetch_sids) {
    std::optional<std::string> value;
    Nanos took = timed_backend_get(StateKey{item.key, sid}, &value);
    MonitorLock lk(*mon_);
    fetch_latency_.push(to_ms(took));
    fetched.emplace_back(sid, value.value_or(std::string()));
  }
  {
    MonitorLock lk(*mon_);
    c_async_fetches_.fetch_add(1, std::memory_order_relaxed);
    for (auto& [sid, value] : fetched) {
      StateKey ck{item.key, sid};
      if (cache_->peek(ck)) continue;
      admit_locked(ck, std::move(value), item.event_time_ms, Origin::Accessed, false, -1);
    }
    drain_victims_locked();
    enforce_buffer_bound_locked();
    --async_running_;
    mon_->notify_all();
  }
  completion_->send(Completion{item.key});
}

void StateService::admit_locked(const StateKey& ck, std::string value, std::int64_t t,
                                Origin origin, bool dirty, int candidate) {
  cache_->insert(ck, std::move(value), t, origin, dirty, candidate);
  drain_victims_locked();
  enforce_buffer_bound_locked();
}

void StateService::drain_victims_locked() {
  for (auto& v : cache_->take_victims()) {
    if (!v.staged) account_final_locked(v.origin, v.used, v.candidate);
    // Staged victims are accounted when their writeback completes.
  }
}

// Bounded-memory backstop: when staged writebacks exceed the buffer bound the
// caller drains slots itself instead of waiting for a pool worker, which may
// itself be blocked admitting fetched state.
void StateService::enforce_buffer_bound_locked() {
  while (cache_->eviction_buffer_size() > cache_->eviction_buffer_bound()) {
    auto job = cache_->pop_writeback();
    if (!job) return;
    mon_->unlock();
    bool ok = true;
    try {
      backend_.put(job->key, job->value);
    } catch (const BackendShutdown&) {
      ok = false;
    }
    mon_->lock();
    c_writebacks_.fetch_add(1, std::memory_order_relaxed);
    if (auto fin = cache_->complete_writeback(job->key, job->version, ok))
      account_final_locked(fin->origin, fin->used, fin->candidate);
  }
}

void StateService::account_final_locked(Origin origin, bool used, int candidate) {
  if (origin != Origin::Prefetched) return;
  if (used) return;  // counted at first use
  c_prefetch_unused_.fetch_add(1, std::memory_order_relaxed);
  auto active = controller_ ? controller_->active(stateful_op_) : std::nullopt;
  if (active && candidate == *active) ++window_unused_;
}

void StateService::note_first_use_locked(const StateKey& ck) {
  auto meta = cache_->peek(ck);
  if (meta && meta->origin == Origin::Prefetched && !meta->used)
    c_prefetch_used_.fetch_add(1, std::memory_order_relaxed);
}

void StateService::finish() {
  mon_->lock();
  draining_ = true;
  // Remaining unprocessed hints are moot: no more data follows them.
  while (buf_.unprocessed_size() > 0) {
    auto e = buf_.pop_earliest_to_in_flight();
    if (e) buf_.complete_in_flight(e->key);
  }
  mon_->notify_all();
  // Worker-owned fetches (prefetch in-flight, queued or running async gets)
  // complete on their own; wait them out.
  while (buf_.in_flight_size() > 0 || !fetch_queue_.empty() || async_running_ > 0) mon_->wait();
  // Drain every staged writeback ourselves.
  for (;;) {
    auto job = cache_->pop_writeback();
    if (!job) break;
    mon_->unlock();
    bool ok = true;
    try {
      backend_.put(job->key, job->value);
    } catch (const BackendShutdown&) {
      ok = false;
    }
    mon_->lock();
    c_writebacks_.fetch_add(1, std::memory_order_relaxed);
    if (auto fin = cache_->complete_writeback(job->key, job->version, ok))
      account_final_locked(fin->origin, fin->used, fin->candidate);
  }
  shutdown_ = true;
  mon_->notify_all();
  while (workers_running_ > 0) mon_->wait();

  // Flush: every dirty entry written back, all entries clean.
  auto jobs = cache_->dirty_snapshot();
  for (auto& job : jobs) {
    mon_->unlock();
    bool ok = true;
    try {
      backend_.put(job.key, job.value);
    } catch (const BackendShutdown&) {
      ok = false;
    }
    mon_->lock();
    if (ok) {
      cache_->mark_clean(job.key, job.version);
      c_flush_writes_.fetch_add(1, std::memory_order_relaxed);
    }
  }

  // Residual accounting: prefetched entries never accessed count as misses.
  for (auto& [key, meta] : cache_->entries()) {
    (void)key;
    if (meta.origin == Origin::Prefetched && !meta.used)
      c_prefetch_unused_residual_.fetch_add(1, std::memory_order_relaxed);
  }
  mon_->unlock();
}

}  // namespace kps

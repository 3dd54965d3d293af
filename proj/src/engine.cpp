#include "kps/engine.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <unordered_map>

#include "kps/cms.hpp"
#include "kps/hash.hpp"
#include "kps/logics.hpp"
#include "kps/workload.hpp"

namespace kps {

namespace {

struct SourceCmd {
  Marker marker;
};

template <typename T>
int pick_visible(const std::vector<Channel<T>*>& chans, Nanos now) {
  int best = -1;
  Nanos best_at = 0;
  for (std::size_t i = 0; i < chans.size(); ++i) {
    auto r = chans[i]->head_ready_at_locked();
    if (r && *r <= now && (best < 0 || *r < best_at)) {
      best = static_cast<int>(i);
      best_at = *r;
    }
  }
  return best;
}

template <typename T>
void fold_min_deadline(const std::vector<Channel<T>*>& chans, std::optional<Nanos>& dl) {
  for (auto* c : chans) {
    auto r = c->head_ready_at_locked();
    if (r && (!dl || *r < *dl)) dl = *r;
  }
}

template <typename T>
bool all_drained(const std::vector<Channel<T>*>& chans) {
  for (auto* c : chans)
    if (!c->drained_locked()) return false;
  return true;
}

}  // namespace

struct Engine::Impl {
  struct HintTarget {
    int stateful_op;
    std::vector<Channel<HintMsg>*> chans;  // one per stateful subtask
  };

  struct Sub {
    int op = -1;
    int idx = 0;
    std::unique_ptr<InputGate> gate;
    std::vector<Channel<DataMsg>*> in_data;
    std::vector<Channel<HintMsg>*> in_hints;

    struct Out {
      EdgeMode mode;
      std::vector<Channel<DataMsg>*> chans;
      std::size_t rr = 0;
    };
    std::vector<Out> outs;
    std::vector<HintTarget> hint_targets;

    std::unique_ptr<Channel<SourceCmd>> mailbox;
    std::unique_ptr<WorkloadGen> gen;
    std::atomic<std::int64_t> lag_ms{0};

    std::unique_ptr<CmsSketch> cms;
    std::unique_ptr<StateService> service;
    MetricsRegistry::LatencyBuffer* lat = nullptr;
    bool candidate = false;
  };

  Impl(Engine& eng, const Graph& g, EngineOptions o, MetricsRegistry& m)
      : engine(eng), graph(g), opt(std::move(o)), metrics(m) {}

  Engine& engine;
  const Graph& graph;
  EngineOptions opt;
  MetricsRegistry& metrics;
  Runtime* rt = nullptr;
  PrefetchController* controller = nullptr;

  std::vector<std::vector<std::unique_ptr<Sub>>> subs;
  std::map<int, std::vector<std::unique_ptr<SimBackend>>> backends;
  std::vector<std::unique_ptr<Channel<DataMsg>>> data_channels;
  std::vector<std::unique_ptr<Channel<HintMsg>>> hint_channels;

  std::unique_ptr<Monitor> lifecycle_mon;
  int sources_left = 0;
  std::atomic<bool> abort_flag{false};
  std::atomic<std::int64_t> measure_start_ns{-1};
  std::atomic<std::int64_t> lag_at_measure_x1000{0};

  std::size_t total_cache_capacity = 0;

  // ---------------------------------------------------------------- build

  void build() {
    const auto& ops = graph.ops();
    subs.resize(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      subs[i].reserve(static_cast<std::size_t>(ops[i].parallelism));
      for (int k = 0; k < ops[i].parallelism; ++k) {
        auto s = std::make_unique<Sub>();
        s->op = static_cast<int>(i);
        s->idx = k;
        s->gate = std::make_unique<InputGate>(*rt);
        subs[i].push_back(std::move(s));
      }
    }

    // Data channels: full bipartite per edge so markers keep FIFO order on
    // every (producer subtask, consumer subtask) pair.
    for (const auto& e : graph.edges()) {
      int from = graph.index_of(e.from);
      int to = graph.index_of(e.to);
      for (auto& up : subs[static_cast<std::size_t>(from)]) {
        Sub::Out out;
        out.mode = e.mode;
        for (auto& down : subs[static_cast<std::size_t>(to)]) {
          data_channels.push_back(std::make_unique<Channel<DataMsg>>(
              *rt, *down->gate, e.capacity, from_ms(e.delay_ms)));
          out.chans.push_back(data_channels.back().get());
          down->in_data.push_back(data_channels.back().get());
        }
        up->outs.push_back(std::move(out));
      }
    }

    // Sources.
    for (int op : graph.ops_of_kind(OpKind::Source)) {
      for (auto& s : subs[static_cast<std::size_t>(op)]) {
        s->mailbox = std::make_unique<Channel<SourceCmd>>(*rt, *s->gate, kUnboundedChannel, 0);
        WorkloadSpec w = *graph.op(op).workload;
        w.seed = mix64(w.seed ^ (0xD1CEull + static_cast<std::uint64_t>(s->idx)));
        s->gen = std::make_unique<WorkloadGen>(w);
        ++sources_left;
      }
    }

    // Stateful operators: backends, hint side channels, services.
    for (int op : graph.ops_of_kind(OpKind::Stateful)) {
      const auto& spec = graph.op(op);
      auto& be = backends[op];
      for (int k = 0; k < spec.parallelism; ++k) {
        BackendProfile prof = opt.backend;
        prof.seed = mix64(prof.seed ^ (0xBEEFull + static_cast<std::uint64_t>(k)));
        be.push_back(std::make_unique<SimBackend>(*rt, prof));
      }
      total_cache_capacity +=
          opt.service.cache_capacity * static_cast<std::size_t>(spec.parallelism);

      std::vector<int> cands;
      if (opt.mode == Mode::KeyedPrefetching) {
        cands = graph.candidate_lookaheads(op);
        controller->register_stateful(op, cands);
        for (int c : cands) {
          for (auto& csub : subs[static_cast<std::size_t>(c)]) {
            csub->candidate = true;
            Impl::HintTarget target;
            target.stateful_op = op;
            for (auto& ssub : subs[static_cast<std::size_t>(op)]) {
              hint_channels.push_back(std::make_unique<Channel<HintMsg>>(
                  *rt, *ssub->gate, opt.hint_channel_capacity,
                  from_ms(opt.hint_channel_delay_ms)));
              target.chans.push_back(hint_channels.back().get());
              ssub->in_hints.push_back(hint_channels.back().get());
            }
            csub->hint_targets.push_back(std::move(target));
            if (!csub->cms) {
              CmsSketch::Params p = opt.cms;
              p.seed = mix64(p.seed ^ mix64(static_cast<std::uint64_t>(c) * 131 +
                                            static_cast<std::uint64_t>(csub->idx)));
              csub->cms = std::make_unique<CmsSketch>(p);
            }
          }
        }
      }

      std::vector<StateService::CandidateWiring> wiring;
      for (int c : cands)
        wiring.push_back({c, static_cast<std::size_t>(graph.op(c).parallelism)});

      ServiceOptions so = opt.service;
      so.mode = opt.mode;
      switch (opt.mode) {
        case Mode::KeyedPrefetching:
          so.policy = CachePolicy::Tac;
          break;
        case Mode::CacheLru:
          so.policy = CachePolicy::Lru;
          break;
        case Mode::CacheClock:
          so.policy = CachePolicy::Clock;
          break;
        case Mode::AsyncIo:
          so.policy = opt.async_cache_policy;
          break;
      }
      for (auto& ssub : subs[static_cast<std::size_t>(op)]) {
        ssub->service = std::make_unique<StateService>(
            *rt, *be[static_cast<std::size_t>(ssub->idx)], metrics, so, op, spec.id,
            ssub->in_data.size(), spec.logic->state_ids(), spec.logic->hinted_state_ids(),
            wiring, opt.mode == Mode::KeyedPrefetching ? controller : nullptr, *ssub->gate);
      }
    }

    // Sinks get latency buffers.
    for (int op : graph.ops_of_kind(OpKind::Sink))
      for (auto& s : subs[static_cast<std::size_t>(op)]) s->lat = &metrics.latency_buffer();

    lifecycle_mon = rt->make_monitor();
  }

  void spawn_all() {
    for (const auto& col : subs) {
      for (const auto& s : col) {
        Sub* sp = s.get();
        const auto& spec = graph.op(sp->op);
        std::string name = spec.id + "[" + std::to_string(sp->idx) + "]";
        switch (spec.kind) {
          case OpKind::Source:
            rt->spawn(name, [this, sp] { source_worker(*sp); });
            break;
          case OpKind::Map:
          case OpKind::Filter:
            rt->spawn(name, [this, sp] { map_worker(*sp); });
            break;
          case OpKind::Stateful:
            rt->spawn(name, [this, sp] { stateful_worker(*sp); });
            for (int w = 0; w < opt.service.pool_size; ++w)
              rt->spawn(name + ".io" + std::to_string(w), [sp] { sp->service->io_worker_loop(); });
            break;
          case OpKind::Sink:
            rt->spawn(name, [this, sp] { sink_worker(*sp); });
            break;
        }
      }
    }
    if (opt.marker_period_ms > 0 && opt.mode == Mode::KeyedPrefetching)
      rt->spawn("marker-scheduler", [this] { marker_worker(); });
    if (opt.warmup_factor > 0 || opt.min_warmup_ms > 0)
      rt->spawn("measure-gate", [this] { gate_worker(); });
    if (!opt.scenario.empty()) rt->spawn("scenario", [this] { scenario_worker(); });
  }

  // ------------------------------------------------------------- helpers

  void emit_tuple(Sub& s, const Tuple& t) {
    for (auto& out : s.outs) {
      switch (out.mode) {
        case EdgeMode::Hash:
          out.chans[route(t.key, static_cast<std::uint32_t>(out.chans.size()))]->send(
              DataMsg{t});
          break;
        case EdgeMode::Forward:
          if (out.chans.size() == subs[static_cast<std::size_t>(s.op)].size()) {
            out.chans[static_cast<std::size_t>(s.idx)]->send(DataMsg{t});
          } else {
            out.chans[out.rr++ % out.chans.size()]->send(DataMsg{t});
          }
          break;
        case EdgeMode::Broadcast:
          for (auto* c : out.chans) c->send(DataMsg{t});
          break;
      }
    }
  }

  void emit_marker(Sub& s, const Marker& m) {
    for (auto& out : s.outs)
      for (auto* c : out.chans) c->send(DataMsg{m});
  }

  void close_outputs(Sub& s) {
    for (auto& out : s.outs)
      for (auto* c : out.chans) c->close();
    for (auto& target : s.hint_targets)
      for (auto* c : target.chans) c->close();
  }

  void duplicate_marker_to_hints(Sub& s, const Marker& m) {
    Marker copy = m;
    copy.origin_lookahead = s.op;
    for (auto& target : s.hint_targets)
      for (auto* c : target.chans) c->send(HintMsg{copy});
  }

  void extract_and_emit_hints(Sub& s, const Tuple& t) {
    if (!s.candidate || !controller->emitting(s.op)) return;
    const auto& spec = graph.op(s.op);
    std::string key = spec.key_extractor(t.payload);
    if (key.empty()) {
      metrics.counter(spec.id + ".hint_extract_failures").fetch_add(1, std::memory_order_relaxed);
      return;
    }
    s.cms->update(key);
    if (s.cms->is_hot(key)) {
      metrics.counter(spec.id + ".hints_suppressed_hot").fetch_add(1, std::memory_order_relaxed);
      return;
    }
    metrics.counter(spec.id + ".hints_emitted").fetch_add(1, std::memory_order_relaxed);
    for (auto& target : s.hint_targets) {
      std::uint32_t part = route(key, static_cast<std::uint32_t>(target.chans.size()));
      target.chans[part]->send(HintMsg{PrefetchHint{key, t.event_time_ms, s.op}});
    }
  }

  // ------------------------------------------------------------- workers

  void source_worker(Sub& s) {
    const auto& spec = graph.op(s.op);
    std::atomic<std::int64_t>& max_lag = metrics.counter("source.max_lag_ms");
    auto next = s.gen->next();
    for (;;) {
      enum class Act { Emit, Cmd, Done } act = Act::Done;
      SourceCmd cmd;
      {
        MonitorLock lk(s.gate->monitor());
        for (;;) {
          Nanos now = rt->now();
          if (s.mailbox->head_visible_locked(now)) {
            cmd = s.mailbox->pop_locked();
            act = Act::Cmd;
            break;
          }
          if (!next || abort_flag.load(std::memory_order_relaxed)) {
            act = Act::Done;
            break;
          }
          Nanos due = from_ms(static_cast<double>(next->emit_ms));
          if (now >= due) {
            act = Act::Emit;
            break;
          }
          s.gate->monitor().wait_until(due);
        }
      }
      if (act == Act::Done) break;
      if (act == Act::Cmd) {
        emit_marker(s, cmd.marker);
        continue;
      }
      Tuple t;
      t.event_time_ms = next->event_ms;
      t.key = next->key;
      t.payload = make_payload(next->key, next->index, spec.source_tag,
                               spec.workload->payload_size);
      t.seq = next->index;
      t.ingest_clock = rt->now();
      emit_tuple(s, t);

      std::int64_t lag = static_cast<std::int64_t>(to_ms(rt->now())) - next->emit_ms;
      s.lag_ms.store(lag, std::memory_order_relaxed);
      std::int64_t prev = max_lag.load(std::memory_order_relaxed);
      while (lag > prev && !max_lag.compare_exchange_weak(prev, lag)) {
      }
      if (opt.max_source_lag_ms > 0 && lag > opt.max_source_lag_ms)
        abort_flag.store(true, std::memory_order_relaxed);

      next = s.gen->next();
    }
    metrics.counter("source." + spec.id + ".produced")
        .fetch_add(static_cast<std::int64_t>(s.gen->produced()));
    metrics.counter("source." + spec.id + ".hot_draws")
        .fetch_add(static_cast<std::int64_t>(s.gen->hot_draw_count()));
    close_outputs(s);
    {
      MonitorLock lk(*lifecycle_mon);
      --sources_left;
      lifecycle_mon->notify_all();
    }
  }

  void map_worker(Sub& s) {
    const auto& spec = graph.op(s.op);
    for (;;) {
      bool have = false;
      DataMsg msg;
      {
        MonitorLock lk(s.gate->monitor());
        for (;;) {
          Nanos now = rt->now();
          int ch = pick_visible(s.in_data, now);
          if (ch >= 0) {
            msg = s.in_data[static_cast<std::size_t>(ch)]->pop_locked();
            have = true;
            break;
          }
          if (all_drained(s.in_data)) break;
          std::optional<Nanos> dl;
          fold_min_deadline(s.in_data, dl);
          if (dl)
            s.gate->monitor().wait_until(*dl);
          else
            s.gate->monitor().wait();
        }
      }
      if (!have) break;
      if (std::holds_alternative<Marker>(msg)) {
        const Marker& m = std::get<Marker>(msg);
        emit_marker(s, m);
        if (s.candidate) duplicate_marker_to_hints(s, m);
        continue;
      }
      Tuple t = std::move(std::get<Tuple>(msg));
      if (spec.service_time_ms > 0) rt->sleep_for(from_ms(spec.service_time_ms));
      if (spec.kind == OpKind::Filter && spec.predicate && !spec.predicate(t)) continue;
      if (spec.transform) spec.transform(t);
      if (spec.key_extractor) t.key = spec.key_extractor(t.payload);
      emit_tuple(s, t);
      extract_and_emit_hints(s, t);
    }
    close_outputs(s);
  }

  void stateful_worker(Sub& s) {
    const auto& spec = graph.op(s.op);
    StateService& svc = *s.service;
    std::unordered_map<std::string, std::deque<Tuple>> parked;
    std::size_t parked_tuples = 0;
    const bool async = opt.mode == Mode::AsyncIo;
    Channel<Completion>& completions = svc.completion_channel();

    auto process_tuple = [&](const Tuple& t) {
      if (spec.service_time_ms > 0) rt->sleep_for(from_ms(spec.service_time_ms));
      struct Access final : StateAccess {
        StateService& svc;
        const Tuple& t;
        Access(StateService& s_, const Tuple& t_) : svc(s_), t(t_) {}
        std::string get(std::uint32_t sid) override {
          return svc.read_state(t.key, sid, t.event_time_ms);
        }
        void put(std::uint32_t sid, std::string v) override {
          svc.write_state(t.key, sid, std::move(v), t.event_time_ms);
        }
        std::int64_t event_time_ms() const override { return t.event_time_ms; }
      } access(svc, t);
      std::vector<Tuple> out;
      spec.logic->process(t, access, out);
      for (auto& o : out) emit_tuple(s, o);
    };

    for (;;) {
      enum class What { None, Hint, Done, Data } what = What::None;
      HintMsg hmsg;
      Completion comp;
      DataMsg dmsg;
      bool have_completion = false;
      {
        MonitorLock lk(s.gate->monitor());
        for (;;) {
          Nanos now = rt->now();
          int hch = pick_visible(s.in_hints, now);
          if (hch >= 0) {
            hmsg = s.in_hints[static_cast<std::size_t>(hch)]->pop_locked();
            what = What::Hint;
            break;
          }
          if (completions.head_visible_locked(now)) {
            comp = completions.pop_locked();
            have_completion = true;
            what = What::Done;
            break;
          }
          if (parked_tuples < opt.parked_capacity) {
            int dch = pick_visible(s.in_data, now);
            if (dch >= 0) {
              dmsg = s.in_data[static_cast<std::size_t>(dch)]->pop_locked();
              what = What::Data;
              break;
            }
          }
          if (all_drained(s.in_data) && all_drained(s.in_hints) && parked_tuples == 0) {
            what = What::None;
            break;
          }
          std::optional<Nanos> dl;
          fold_min_deadline(s.in_hints, dl);
          if (auto r = completions.head_ready_at_locked(); r && (!dl || *r < *dl)) dl = *r;
          if (parked_tuples < opt.parked_capacity) fold_min_deadline(s.in_data, dl);
          if (dl)
            s.gate->monitor().wait_until(*dl);
          else
            s.gate->monitor().wait();
        }
      }
      (void)have_completion;
      if (what == What::None) break;

      if (what == What::Hint) {
        if (std::holds_alternative<Marker>(hmsg)) {
          svc.on_hint_marker(std::get<Marker>(hmsg));
        } else {
          svc.on_hint(std::get<PrefetchHint>(hmsg));
        }
        continue;
      }

      if (what == What::Done) {
        auto it = parked.find(comp.key);
        if (it == parked.end()) continue;
        std::deque<Tuple> q = std::move(it->second);
        parked.erase(it);
        parked_tuples -= q.size();
        while (!q.empty()) {
          Tuple t = std::move(q.front());
          q.pop_front();
          if (!svc.async_ensure(t.key, t.event_time_ms)) {
            // Evicted again before we got to it: re-park the rest in order.
            auto& lst = parked[t.key];
            lst.push_back(std::move(t));
            while (!q.empty()) {
              lst.push_back(std::move(q.front()));
              q.pop_front();
            }
            parked_tuples += lst.size();
            break;
          }
          process_tuple(t);
        }
        continue;
      }

      if (std::holds_alternative<Marker>(dmsg)) {
        const Marker& m = std::get<Marker>(dmsg);
        svc.on_data_marker(m);
        emit_marker(s, m);
        continue;
      }
      Tuple t = std::move(std::get<Tuple>(dmsg));
      if (async) {
        auto it = parked.find(t.key);
        if (it != parked.end()) {
          // Per-key order: queue behind the tuple already waiting on I/O.
          it->second.push_back(std::move(t));
          ++parked_tuples;
        } else if (svc.async_ensure(t.key, t.event_time_ms)) {
          process_tuple(t);
        } else {
          parked[t.key].push_back(std::move(t));
          ++parked_tuples;
        }
      } else {
        process_tuple(t);
      }
    }
    svc.finish();
    metrics.counter(spec.id + ".hints_buffer_peak")
        .store(static_cast<std::int64_t>(svc.hints_buffer_peak()));
    close_outputs(s);
  }

  void sink_worker(Sub& s) {
    for (;;) {
      bool have = false;
      DataMsg msg;
      {
        MonitorLock lk(s.gate->monitor());
        for (;;) {
          Nanos now = rt->now();
          int ch = pick_visible(s.in_data, now);
          if (ch >= 0) {
            msg = s.in_data[static_cast<std::size_t>(ch)]->pop_locked();
            have = true;
            break;
          }
          if (all_drained(s.in_data)) break;
          std::optional<Nanos> dl;
          fold_min_deadline(s.in_data, dl);
          if (dl)
            s.gate->monitor().wait_until(*dl);
          else
            s.gate->monitor().wait();
        }
      }
      if (!have) break;
      if (std::holds_alternative<Marker>(msg)) continue;
      const Tuple& t = std::get<Tuple>(msg);
      Nanos now = rt->now();
      s.lat->record(now, now - t.ingest_clock);
      if (opt.collect_sink_outputs) {
        MonitorLock lk(*lifecycle_mon);
        engine.sink_outputs_.push_back(t.payload);
      }
    }
  }

  void marker_worker() {
    std::uint64_t round = 1;
    Nanos period = from_ms(opt.marker_period_ms);
    Nanos next = period;
    for (;;) {
      {
        MonitorLock lk(*lifecycle_mon);
        while (sources_left > 0 && rt->now() < next) lifecycle_mon->wait_until(next);
        if (sources_left == 0) return;
      }
      Marker m;
      m.round = round++;
      m.inject_clock = rt->now();
      for (int op : graph.ops_of_kind(OpKind::Source))
        for (auto& src : subs[static_cast<std::size_t>(op)]) src->mailbox->send(SourceCmd{m});
      next += period;
    }
  }

  // Records measure_start once the state volume exceeds the cache by the
  // warmup factor and the minimum warmup time has passed.
  void gate_worker() {
    Nanos poll = from_ms(20.0);
    for (;;) {
      {
        MonitorLock lk(*lifecycle_mon);
        if (sources_left == 0) break;
        lifecycle_mon->wait_until(rt->now() + poll);
      }
      if (rt->now() < from_ms(static_cast<double>(opt.min_warmup_ms))) continue;
      std::size_t total = 0;
      for (auto& [op, list] : backends)
        for (auto& b : list) total += b->size();
      if (opt.warmup_factor > 0 &&
          static_cast<double>(total) <=
              static_cast<double>(total_cache_capacity) * opt.warmup_factor)
        continue;
      break;
    }
    if (measure_start_ns.load() < 0) {
      measure_start_ns.store(rt->now());
      std::int64_t lag = 0;
      for (const auto& col : subs)
        for (const auto& s : col) lag = std::max(lag, s->lag_ms.load(std::memory_order_relaxed));
      lag_at_measure_x1000.store(lag * 1000);
      metrics.event(rt->now(), "measure_start", 0);
    }
  }

  void scenario_worker() {
    auto events = opt.scenario;
    std::sort(events.begin(), events.end(),
              [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.at_ms < b.at_ms; });
    for (auto& ev : events) {
      Nanos due = from_ms(static_cast<double>(ev.at_ms));
      {
        MonitorLock lk(*lifecycle_mon);
        while (sources_left > 0 && rt->now() < due) lifecycle_mon->wait_until(due);
        if (sources_left == 0) return;
      }
      ev.action();
      metrics.event(rt->now(), "scenario_event", ev.at_ms);
    }
  }
};

Engine::Engine(const Graph& graph, EngineOptions opt, MetricsRegistry& metrics) {
  rt_ = make_runtime(opt.virtual_time);
  controller_ = std::make_unique<PrefetchController>(*rt_, metrics);
  impl_ = std::make_unique<Impl>(*this, graph, std::move(opt), metrics);
  impl_->rt = rt_.get();
  impl_->controller = controller_.get();
  impl_->build();
}

Engine::~Engine() = default;

void Engine::preload(
    const std::function<void(SimBackend&, int op, int subtask, int parallelism)>& fn) {
  for (auto& [op, list] : impl_->backends) {
    int par = static_cast<int>(list.size());
    for (int k = 0; k < par; ++k) fn(*list[static_cast<std::size_t>(k)], op, k, par);
  }
}

SimBackend& Engine::backend(int op, int subtask) {
  return *impl_->backends.at(op).at(static_cast<std::size_t>(subtask));
}

void Engine::run() {
  impl_->spawn_all();
  rt_->start();
  rt_->join();
  result_.unsustainable = impl_->abort_flag.load();
  result_.end_time = rt_->now();
  result_.measure_start = std::max<Nanos>(impl_->measure_start_ns.load(), 0);
  std::int64_t lag = 0;
  for (const auto& col : impl_->subs)
    for (const auto& s : col) lag = std::max(lag, s->lag_ms.load());
  result_.final_lag_ms = static_cast<double>(lag);
  result_.lag_at_measure_start_ms =
      static_cast<double>(impl_->lag_at_measure_x1000.load()) / 1000.0;
}

}  // namespace kps

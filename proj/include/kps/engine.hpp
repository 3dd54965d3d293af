#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kps/backend.hpp"
#include "kps/channel.hpp"
#include "kps/controller.hpp"
#include "kps/graph.hpp"
#include "kps/metrics.hpp"
#include "kps/state_service.hpp"

namespace kps {

struct ScenarioEvent {
  std::int64_t at_ms;
  std::function<void()> action;  // runs on the scenario worker at `at_ms`
};

struct EngineOptions {
  Mode mode = Mode::KeyedPrefetching;
  CachePolicy async_cache_policy = CachePolicy::Lru;  // cache behind async-io
  bool virtual_time = true;

  ServiceOptions service;  // per stateful subtask (capacity already divided)
  BackendProfile backend;

  double marker_period_ms = 100.0;  // <= 0 disables marker rounds
  double hint_channel_delay_ms = 0.0;
  std::size_t hint_channel_capacity = 1 << 16;
  std::size_t parked_capacity = 1024;

  CmsSketch::Params cms;

  // Sustainability: abort sources once their scheduled-emission lag exceeds
  // this bound (0 disables).
  std::int64_t max_source_lag_ms = 0;

  // Measurement gate: measure_start is recorded once total backend keys
  // exceed total cache capacity * warmup_factor and min_warmup_ms passed.
  double warmup_factor = 5.0;
  std::int64_t min_warmup_ms = 0;

  bool collect_sink_outputs = false;
  std::vector<ScenarioEvent> scenario;
};

struct EngineResult {
  bool unsustainable = false;
  Nanos measure_start = 0;
  Nanos end_time = 0;
  double final_lag_ms = 0;
  double lag_at_measure_start_ms = 0;
};

// Materializes a validated graph into subtask workers, ordered channels, hint
// side channels, per-subtask backends and state services, runs it to stream
// completion, and leaves metrics plus latency samples in the registry.
class Engine {
 public:
  Engine(const Graph& graph, EngineOptions opt, MetricsRegistry& metrics);
  ~Engine();

  // Pre-run seeding hook: called per stateful subtask backend.
  // route(key, parallelism) decides which subtask owns a key.
  void preload(const std::function<void(SimBackend&, int op, int subtask, int parallelism)>& fn);

  void run();

  const EngineResult& result() const { return result_; }
  const std::vector<std::string>& sink_outputs() const { return sink_outputs_; }
  PrefetchController& controller() { return *controller_; }
  SimBackend& backend(int op, int subtask);
  Runtime& runtime() { return *rt_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::unique_ptr<Runtime> rt_;
  std::unique_ptr<PrefetchController> controller_;
  EngineResult result_;
  std::vector<std::string> sink_outputs_;
};

}  // namespace kps

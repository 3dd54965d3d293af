#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "kps/runtime.hpp"

namespace kps {

// Named atomic counters plus per-sink latency sample buffers. Counters are
// updated by subtask workers; samples live in per-sink buffers merged at
// report time.
class MetricsRegistry {
 public:
  std::atomic<std::int64_t>& counter(const std::string& name) {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = counters_.find(name);
    if (it == counters_.end())
      it = counters_.emplace(name, std::make_unique<std::atomic<std::int64_t>>(0)).first;
    return *it->second;
  }

  std::int64_t value(const std::string& name) {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = counters_.find(name);
    return it == counters_.end() ? 0 : it->second->load();
  }

  std::map<std::string, std::int64_t> snapshot() {
    std::lock_guard<std::mutex> lk(mu_);
    std::map<std::string, std::int64_t> out;
    for (const auto& [k, v] : counters_) out.emplace(k, v->load());
    return out;
  }

  // One buffer per sink subtask; the owning worker appends without locking.
  struct LatencyBuffer {
    std::vector<std::pair<Nanos, Nanos>> samples;  // (output clock, latency)
    void record(Nanos at, Nanos latency) { samples.emplace_back(at, latency); }
  };

  LatencyBuffer& latency_buffer() {
    std::lock_guard<std::mutex> lk(mu_);
    buffers_.push_back(std::make_unique<LatencyBuffer>());
    return *buffers_.back();
  }

  // Merged samples completed at or after `from`, sorted by completion time.
  std::vector<std::pair<Nanos, Nanos>> merged_samples(Nanos from = 0) {
    std::lock_guard<std::mutex> lk(mu_);
    std::vector<std::pair<Nanos, Nanos>> out;
    for (const auto& b : buffers_)
      for (const auto& s : b->samples)
        if (s.first >= from) out.push_back(s);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Timestamped control-plane events (lookahead switches, discards).
  struct Event {
    Nanos at;
    std::string what;
    std::int64_t value;
  };
  void event(Nanos at, std::string what, std::int64_t value) {
    std::lock_guard<std::mutex> lk(mu_);
    events_.push_back({at, std::move(what), value});
  }
  std::vector<Event> events() {
    std::lock_guard<std::mutex> lk(mu_);
    return events_;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<std::atomic<std::int64_t>>> counters_;
  std::vector<std::unique_ptr<LatencyBuffer>> buffers_;
  std::vector<Event> events_;
};

inline double percentile_of(std::vector<Nanos> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double rank = p * static_cast<double>(values.size() - 1);
  std::size_t idx = static_cast<std::size_t>(rank + 0.5);
  return to_ms(values[std::min(idx, values.size() - 1)]);
}

}  // namespace kps

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kps/hash.hpp"
#include "kps/rng.hpp"

namespace kps {

// Parameterized synthetic workload reproducing the key-distribution structure
// of the benchmark streams: zipf-skewed keys, or a churning hot set where a
// fraction of tuples target a small set of currently-popular keys that is
// redrawn at a fixed interval.
struct WorkloadSpec {
  std::uint64_t key_space = 100000;

  enum class Dist { Zipf, HotSet };
  Dist dist = Dist::Zipf;
  double zipf_alpha = 1.0;
  double p_hot = 0.5;
  std::uint64_t hot_set_size = 100;
  std::int64_t churn_interval_ms = 1000;  // hot set redraw period (event time)

  double rate = 1000.0;  // tuples/second; <= 0 means as fast as possible
  std::int64_t duration_ms = 10000;
  std::uint64_t count = 0;  // explicit cap; 0 derives from rate * duration

  std::size_t payload_size = 200;
  double out_of_order_fraction = 0.0;
  std::int64_t max_lateness_ms = 0;

  std::uint64_t seed = 1;
  std::string key_prefix = "k";
};

struct GenRecord {
  std::uint64_t index = 0;
  std::int64_t emit_ms = 0;   // scheduled emission time
  std::int64_t event_ms = 0;  // event time (emit time minus injected lateness)
  std::string key;
  bool hot_draw = false;  // drew from the hot set (generator-side accounting)
};

// Deterministic per (spec, seed): the i-th record is a pure function of the
// draw sequence, so every mode replays the identical stream.
class WorkloadGen {
 public:
  explicit WorkloadGen(WorkloadSpec spec)
      : spec_(spec), rng_(Rng(spec.seed).fork(0x90AD)) {
    if (spec_.dist == WorkloadSpec::Dist::Zipf) build_zipf_cdf();
    total_ = spec_.count
                 ? spec_.count
                 : (spec_.rate > 0
                        ? static_cast<std::uint64_t>(spec_.rate * spec_.duration_ms / 1000.0)
                        : 0);
  }

  // 0 means unbounded (rate <= 0 and no count: caller stops the stream).
  std::uint64_t total() const { return total_; }

  std::optional<GenRecord> next() {
    if (total_ && produced_ >= total_) return std::nullopt;
    GenRecord r;
    r.index = produced_++;
    r.emit_ms = spec_.rate > 0
                    ? static_cast<std::int64_t>(1000.0 * static_cast<double>(r.index) / spec_.rate)
                    : 0;
    std::uint64_t key_id;
    if (spec_.dist == WorkloadSpec::Dist::Zipf) {
      key_id = draw_zipf();
    } else {
      r.hot_draw = rng_.bernoulli(spec_.p_hot);
      if (r.hot_draw) {
        ++hot_draws_;
        key_id = hot_key(r.emit_ms, rng_.below(spec_.hot_set_size));
      } else {
        key_id = rng_.below(spec_.key_space);
      }
    }
    r.key = spec_.key_prefix + std::to_string(key_id);
    r.event_ms = r.emit_ms;
    if (spec_.out_of_order_fraction > 0 && rng_.bernoulli(spec_.out_of_order_fraction)) {
      std::int64_t late = 1 + static_cast<std::int64_t>(rng_.below(
                                  static_cast<std::uint64_t>(std::max<std::int64_t>(
                                      spec_.max_lateness_ms, 1))));
      r.event_ms = std::max<std::int64_t>(0, r.emit_ms - late);
    }
    return r;
  }

  std::uint64_t hot_draw_count() const { return hot_draws_; }
  std::uint64_t produced() const { return produced_; }

  // The hot set for an epoch is a pure hash of (seed, epoch, slot).
  std::uint64_t hot_key(std::int64_t emit_ms, std::uint64_t slot) const {
    std::int64_t epoch =
        spec_.churn_interval_ms > 0 ? emit_ms / spec_.churn_interval_ms : 0;
    std::uint64_t h = mix64(spec_.seed ^ mix64(static_cast<std::uint64_t>(epoch) * 0x9E37ull + slot));
    return h % spec_.key_space;
  }

 private:
  void build_zipf_cdf() {
    cdf_.resize(spec_.key_space);
    double sum = 0;
    for (std::uint64_t k = 0; k < spec_.key_space; ++k) {
      sum += 1.0 / std::pow(static_cast<double>(k + 1), spec_.zipf_alpha);
      cdf_[k] = sum;
    }
    for (auto& v : cdf_) v /= sum;
  }

  std::uint64_t draw_zipf() {
    double u = rng_.next_double();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    std::uint64_t rank = static_cast<std::uint64_t>(it - cdf_.begin());
    return rank < spec_.key_space ? rank : spec_.key_space - 1;
  }

  WorkloadSpec spec_;
  Rng rng_;
  std::vector<double> cdf_;
  std::uint64_t produced_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t hot_draws_ = 0;
};

}  // namespace kps

#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "kps/runtime.hpp"

namespace kps {

// A keyed, event-timestamped record on a data channel.
struct Tuple {
  std::int64_t event_time_ms = 0;  // order attribute, event time
  std::string key;                 // partitioning key (may be empty pre-keying)
  std::string payload;
  Nanos ingest_clock = 0;  // set at the source, for end-to-end latency
  std::uint64_t seq = 0;   // source-assigned sequence, for traces
};

// Control record propagated in FIFO order with data; measures per-candidate
// prefetch slack. The copy traveling the hint channel carries the duplicating
// candidate's operator index in origin_lookahead.
struct Marker {
  std::uint64_t round = 0;
  int origin_lookahead = -1;
  Nanos inject_clock = 0;
};

// (key, event-time) pair on the hint side channel.
struct PrefetchHint {
  std::string key;
  std::int64_t event_time_ms = 0;
  int origin_op = -1;  // emitting candidate, for prefetch-miss attribution
};

using DataMsg = std::variant<Tuple, Marker>;
using HintMsg = std::variant<PrefetchHint, Marker>;

// Pool -> operator notification that an asynchronous fetch finished.
struct Completion {
  std::string key;
};

struct LatencyRecord {
  Nanos output_clock = 0;
  Nanos latency = 0;
};

}  // namespace kps

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kps/tuple.hpp"
#include "kps/workload.hpp"

namespace kps {

enum class OpKind { Source, Map, Filter, Stateful, Sink };

// Per-tuple state view bound to the current tuple's partition key.
// get returns "" for state never written (read-modify-write starts empty).
class StateAccess {
 public:
  virtual ~StateAccess() = default;
  virtual std::string get(std::uint32_t state_id) = 0;
  virtual void put(std::uint32_t state_id, std::string value) = 0;
  virtual std::int64_t event_time_ms() const = 0;
};

class StatefulLogic {
 public:
  virtual ~StatefulLogic() = default;
  virtual void process(const Tuple& in, StateAccess& state, std::vector<Tuple>& out) = 0;
  // Every state id the logic may touch (async mode pre-fetches these).
  virtual std::vector<std::uint32_t> state_ids() const { return {0}; }
  // State ids a prefetch hint should stage (defaults to all of them).
  virtual std::vector<std::uint32_t> hinted_state_ids() const { return state_ids(); }
};

struct OperatorSpec {
  std::string id;
  OpKind kind = OpKind::Map;
  int parallelism = 1;

  // Map: in-place transform (payload and/or key).
  std::function<void(Tuple&)> transform;
  // Filter: keep iff true.
  std::function<bool(const Tuple&)> predicate;
  // Stateful: per-tuple logic (shared across subtasks; must be stateless itself).
  std::shared_ptr<StatefulLogic> logic;

  // Extracts the downstream stateful operator's state-access key from an
  // output record's payload. Its presence makes this operator a lookahead
  // candidate; maps also use it to key their output tuples.
  std::function<std::string(const std::string& payload)> key_extractor;

  double service_time_ms = 0.0;  // injected per-tuple processing time

  // Sources only: workload portion this source generates, and the stream tag
  // stamped into payloads (multi-input logics dispatch on it).
  std::optional<WorkloadSpec> workload;
  char source_tag = 'A';
};

enum class EdgeMode { Forward, Hash, Broadcast };

struct EdgeSpec {
  std::string from;
  std::string to;
  EdgeMode mode = EdgeMode::Forward;
  double delay_ms = 0.0;  // injected channel delay (pure delay line)
  std::size_t capacity = 8192;
};

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Validated logical dataflow; the engine materializes it into subtasks and
// channels. Hint side channels are wired separately by the controller setup
// and never feed back upstream, so the graph stays acyclic.
class Graph {
 public:
  Graph(std::vector<OperatorSpec> ops, std::vector<EdgeSpec> edges);

  const std::vector<OperatorSpec>& ops() const { return ops_; }
  const std::vector<EdgeSpec>& edges() const { return edges_; }

  int index_of(const std::string& id) const;
  const OperatorSpec& op(int idx) const { return ops_[static_cast<std::size_t>(idx)]; }

  std::vector<int> upstream(int idx) const;    // direct predecessors
  std::vector<int> downstream(int idx) const;  // direct successors
  const std::vector<int>& topo_order() const { return topo_; }

  // All operators on some path into `stateful` that can extract its key,
  // ordered from the one closest to the source to the one closest to it.
  std::vector<int> candidate_lookaheads(int stateful) const;

  std::vector<int> ops_of_kind(OpKind kind) const;

 private:
  void validate();

  std::vector<OperatorSpec> ops_;
  std::vector<EdgeSpec> edges_;
  std::vector<int> topo_;
};

}  // namespace kps

#include "kps/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace kps {

Graph::Graph(std::vector<OperatorSpec> ops, std::vector<EdgeSpec> edges)
    : ops_(std::move(ops)), edges_(std::move(edges)) {
  validate();
}

int Graph::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ops_.size(); ++i)
    if (ops_[i].id == id) return static_cast<int>(i);
  throw GraphError("unknown operator id: " + id);
}

std::vector<int> Graph::upstream(int idx) const {
  std::vector<int> out;
  for (const auto& e : edges_)
    if (index_of(e.to) == idx) out.push_back(index_of(e.from));
  return out;
}

std::vector<int> Graph::downstream(int idx) const {
  std::vector<int> out;
  for (const auto& e : edges_)
    if (index_of(e.from) == idx) out.push_back(index_of(e.to));
  return out;
}

std::vector<int> Graph::ops_of_kind(OpKind kind) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < ops_.size(); ++i)
    if (ops_[i].kind == kind) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Graph::candidate_lookaheads(int stateful) const {
  // Reachability upstream of the stateful operator.
  std::set<int> reach;
  std::deque<int> work{stateful};
  while (!work.empty()) {
    int cur = work.front();
    work.pop_front();
    for (int up : upstream(cur)) {
      if (reach.insert(up).second) work.push_back(up);
    }
  }
  std::vector<int> out;
  for (int idx : topo_) {
    if (!reach.count(idx)) continue;
    if (ops_[static_cast<std::size_t>(idx)].key_extractor) out.push_back(idx);
  }
  return out;  // topo order = source side first
}

void Graph::validate() {
  if (ops_.empty()) throw GraphError("empty graph");
  std::set<std::string> ids;
  for (const auto& op : ops_) {
    if (!ids.insert(op.id).second) throw GraphError("duplicate operator id: " + op.id);
    if (op.parallelism < 1) throw GraphError("non-positive parallelism: " + op.id);
    if (op.kind == OpKind::Source && !op.workload)
      throw GraphError("source without workload: " + op.id);
    if (op.kind == OpKind::Stateful && !op.logic)
      throw GraphError("stateful operator without logic: " + op.id);
  }
  for (const auto& e : edges_) {
    if (!ids.count(e.from)) throw GraphError("dangling edge from: " + e.from);
    if (!ids.count(e.to)) throw GraphError("dangling edge to: " + e.to);
    if (ops_[static_cast<std::size_t>(index_of(e.to))].kind == OpKind::Stateful &&
        e.mode != EdgeMode::Hash)
      throw GraphError("keyed-stateful operator fed by a non-hash edge: " + e.to);
  }

  // Kahn's algorithm: topological order, cycle detection, connectivity.
  std::map<int, int> indeg;
  for (std::size_t i = 0; i < ops_.size(); ++i) indeg[static_cast<int>(i)] = 0;
  for (const auto& e : edges_) indeg[index_of(e.to)]++;
  std::deque<int> ready;
  for (auto& [idx, d] : indeg)
    if (d == 0) ready.push_back(idx);
  topo_.clear();
  while (!ready.empty()) {
    int cur = ready.front();
    ready.pop_front();
    topo_.push_back(cur);
    for (int next : downstream(cur)) {
      if (--indeg[next] == 0) ready.push_back(next);
    }
  }
  if (topo_.size() != ops_.size()) throw GraphError("cycle detected");

  // Connectivity over the undirected edge relation.
  if (!edges_.empty() || ops_.size() == 1) {
    std::set<int> seen{topo_.front()};
    std::deque<int> work{topo_.front()};
    while (!work.empty()) {
      int cur = work.front();
      work.pop_front();
      for (int n : downstream(cur))
        if (seen.insert(n).second) work.push_back(n);
      for (int n : upstream(cur))
        if (seen.insert(n).second) work.push_back(n);
    }
    if (seen.size() != ops_.size()) throw GraphError("graph is not connected");
  } else {
    throw GraphError("graph is not connected");
  }
}

}  // namespace kps

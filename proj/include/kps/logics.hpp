#pragma once

#include <cstdint>
#include <string>

#include "kps/graph.hpp"

namespace kps {

// Payload wire format: "<key>|<seq>|<tag>|<padding>". The key field is what
// candidate lookaheads extract; rewriting operators replace it in place.
std::string make_payload(const std::string& key, std::uint64_t seq, char tag,
                         std::size_t payload_size);
std::string payload_key(const std::string& payload);
std::uint64_t payload_seq(const std::string& payload);
char payload_tag(const std::string& payload);
std::string with_payload_key(const std::string& payload, const std::string& new_key);

// State value format: "<number>|<padding to state_size>".
std::string render_state(std::int64_t number, std::size_t state_size);
std::int64_t state_number(const std::string& value);

// Per-key counter enrichment. read_only: emit the current counter without
// updating it (pure enrichment); otherwise read-modify-write.
class CounterEnrichLogic final : public StatefulLogic {
 public:
  CounterEnrichLogic(bool read_only, std::size_t state_size)
      : read_only_(read_only), state_size_(state_size) {}

  void process(const Tuple& in, StateAccess& state, std::vector<Tuple>& out) override {
    std::int64_t count = state_number(state.get(0));
    if (!read_only_) {
      ++count;
      state.put(0, render_state(count, state_size_));
    }
    Tuple t = in;
    t.payload += "#" + std::to_string(count);
    out.push_back(std::move(t));
  }

 private:
  bool read_only_;
  std::size_t state_size_;
};

// Keyed running maximum of a derived price attribute; emits only when the
// maximum improves (top-1 per key).
class TopOneLogic final : public StatefulLogic {
 public:
  explicit TopOneLogic(std::size_t state_size) : state_size_(state_size) {}

  static std::int64_t price_of(std::uint64_t seq) {
    return static_cast<std::int64_t>(mix64(seq * 0x9E3779B97F4A7C15ull) % 10000);
  }

  void process(const Tuple& in, StateAccess& state, std::vector<Tuple>& out) override {
    std::int64_t best = state_number(state.get(0));
    std::int64_t price = price_of(payload_seq(in.payload));
    if (price > best) {
      state.put(0, render_state(price, state_size_));
      Tuple t = in;
      t.payload += "#top=" + std::to_string(price);
      out.push_back(std::move(t));
    }
  }

 private:
  std::size_t state_size_;
};

// Two-stream keyed join: tag 'A' rows build state 0; tag 'B' rows probe it
// and keep a per-key match counter in state 1 (composite keys in action).
class JoinLogic final : public StatefulLogic {
 public:
  explicit JoinLogic(std::size_t state_size) : state_size_(state_size) {}

  std::vector<std::uint32_t> state_ids() const override { return {0, 1}; }

  void process(const Tuple& in, StateAccess& state, std::vector<Tuple>& out) override {
    if (payload_tag(in.payload) == 'A') {
      state.put(0, render_state(static_cast<std::int64_t>(payload_seq(in.payload)) + 1,
                                state_size_));
      return;
    }
    std::int64_t build_row = state_number(state.get(0));
    if (build_row == 0) return;  // no build side yet: drop the probe
    std::int64_t matches = state_number(state.get(1)) + 1;
    state.put(1, render_state(matches, state_size_));
    Tuple t = in;
    t.payload += "#join=" + std::to_string(build_row) + "/" + std::to_string(matches);
    out.push_back(std::move(t));
  }

 private:
  std::size_t state_size_;
};

}  // namespace kps

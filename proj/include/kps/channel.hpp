#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <memory>
#include <optional>

#include "kps/runtime.hpp"

namespace kps {

// Wait point shared by every channel feeding one consumer worker, so the
// worker can block on "any input has something for me".
class InputGate {
 public:
  explicit InputGate(Runtime& rt) : mon_(rt.make_monitor()) {}
  Monitor& monitor() { return *mon_; }

 private:
  std::unique_ptr<Monitor> mon_;
};

// Ordered single-producer single-consumer queue. An optional per-edge delay
// emulates network-buffer latency: an element becomes visible to the consumer
// `delay` after it was enqueued, as a pure delay line (no capacity consumed).
// FIFO is preserved because every element of a channel shares one delay.
//
// Producer API locks the consumer gate's monitor internally. Consumer-side
// *_locked methods require the gate monitor to be held by the caller.
template <typename T>
class Channel {
 public:
  Channel(Runtime& rt, InputGate& gate, std::size_t capacity, Nanos delay)
      : rt_(rt), mon_(gate.monitor()), cap_(capacity ? capacity : 1), delay_(delay) {}

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  // Blocks while the channel is full.
  void send(T item) {
    MonitorLock lk(mon_);
    while (q_.size() >= cap_) mon_.wait();
    q_.push_back(Slot{std::move(item), rt_.now() + delay_});
    mon_.notify_all();
  }

  void close() {
    MonitorLock lk(mon_);
    closed_ = true;
    mon_.notify_all();
  }

  // --- consumer side; gate monitor held ---

  bool empty_locked() const { return q_.empty(); }
  bool closed_locked() const { return closed_; }
  bool drained_locked() const { return closed_ && q_.empty(); }
  std::size_t size_locked() const { return q_.size(); }

  // Visibility time of the head element, if any.
  std::optional<Nanos> head_ready_at_locked() const {
    if (q_.empty()) return std::nullopt;
    return q_.front().ready_at;
  }

  bool head_visible_locked(Nanos now) const {
    return !q_.empty() && q_.front().ready_at <= now;
  }

  T pop_locked() {
    T out = std::move(q_.front().item);
    q_.pop_front();
    mon_.notify_all();  // wake a producer blocked on capacity
    return out;
  }

 private:
  struct Slot {
    T item;
    Nanos ready_at;
  };

  Runtime& rt_;
  Monitor& mon_;
  std::deque<Slot> q_;
  std::size_t cap_;
  Nanos delay_;
  bool closed_ = false;
};

constexpr std::size_t kUnboundedChannel = std::numeric_limits<std::size_t>::max();

}  // namespace kps

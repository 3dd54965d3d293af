#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace kps {

// Engine-internal time: nanoseconds since runtime start (monotonic).
using Nanos = std::int64_t;

constexpr Nanos kMicro = 1'000;
constexpr Nanos kMilli = 1'000'000;
constexpr Nanos kSecond = 1'000'000'000;

inline constexpr Nanos from_ms(double v) { return static_cast<Nanos>(v * 1e6); }
inline constexpr double to_ms(Nanos v) { return static_cast<double>(v) / 1e6; }

// A mutex fused with one wait set. All blocking in the engine goes through
// this interface so the same worker code runs both on real threads and under
// the deterministic virtual-time scheduler.
//
// Virtual-mode discipline: a worker must not sleep or block while holding a
// monitor (wait()/wait_until() release it first); violations abort.
class Monitor {
 public:
  virtual ~Monitor() = default;
  virtual void lock() = 0;
  virtual void unlock() = 0;
  // Pre: locked. Releases the monitor, blocks until notify_all(), re-acquires
  // before returning. May wake spuriously; callers loop on a predicate.
  virtual void wait() = 0;
  // As wait(), but also wakes once now() reaches `deadline`. Returns false if
  // the deadline fired before a notification.
  virtual bool wait_until(Nanos deadline) = 0;
  // Pre: locked.
  virtual void notify_all() = 0;
};

class MonitorLock {
 public:
  explicit MonitorLock(Monitor& m) : m_(&m) { m_->lock(); }
  ~MonitorLock() {
    if (m_) m_->unlock();
  }
  MonitorLock(const MonitorLock&) = delete;
  MonitorLock& operator=(const MonitorLock&) = delete;

 private:
  Monitor* m_;
};

// Hosts the engine's logical workers (subtasks, I/O pool threads, the marker
// scheduler) and owns the clock. Two implementations:
//  - wallclock: one OS thread per worker, std::steady_clock, real sleeps.
//  - virtual: one OS thread per worker but exactly one runnable at a time;
//    time advances only through sleeps and timed waits, so runs are
//    deterministic and latency arithmetic is exact.
class Runtime {
 public:
  virtual ~Runtime() = default;
  virtual bool is_virtual() const = 0;
  virtual Nanos now() = 0;
  // Blocking; in virtual mode callable only from a spawned worker.
  virtual void sleep_for(Nanos d) = 0;
  virtual void sleep_until(Nanos deadline) = 0;
  virtual std::unique_ptr<Monitor> make_monitor() = 0;
  // All workers must be spawned before start(); bodies begin at start().
  virtual void spawn(std::string name, std::function<void()> body) = 0;
  virtual void start() = 0;
  // Blocks until every worker body returned, then joins the threads.
  virtual void join() = 0;
};

std::unique_ptr<Runtime> make_wallclock_runtime();
std::unique_ptr<Runtime> make_virtual_runtime();
std::unique_ptr<Runtime> make_runtime(bool virtual_time);

}  // namespace kps

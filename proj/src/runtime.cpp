#include "kps/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>
#include <vector>

namespace kps {
namespace {

// ---------------------------------------------------------------------------
// Wallclock

class WallclockRuntime;

class WallMonitor final : public Monitor {
 public:
  explicit WallMonitor(std::chrono::steady_clock::time_point epoch) : epoch_(epoch) {}

  void lock() override { mu_.lock(); }
  void unlock() override { mu_.unlock(); }

  void wait() override {
    std::unique_lock<std::mutex> lk(mu_, std::adopt_lock);
    cv_.wait(lk);
    lk.release();
  }

  bool wait_until(Nanos deadline) override {
    std::unique_lock<std::mutex> lk(mu_, std::adopt_lock);
    auto status = cv_.wait_until(lk, epoch_ + std::chrono::nanoseconds(deadline));
    lk.release();
    return status == std::cv_status::no_timeout;
  }

  void notify_all() override { cv_.notify_all(); }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::chrono::steady_clock::time_point epoch_;
};

class WallclockRuntime final : public Runtime {
 public:
  WallclockRuntime() : epoch_(std::chrono::steady_clock::now()) {}

  bool is_virtual() const override { return false; }

  Nanos now() override {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - epoch_)
        .count();
  }

  void sleep_for(Nanos d) override {
    if (d > 0) std::this_thread::sleep_for(std::chrono::nanoseconds(d));
  }

  void sleep_until(Nanos deadline) override {
    std::this_thread::sleep_until(epoch_ + std::chrono::nanoseconds(deadline));
  }

  std::unique_ptr<Monitor> make_monitor() override {
    return std::make_unique<WallMonitor>(epoch_);
  }

  void spawn(std::string name, std::function<void()> body) override {
    pending_.push_back({std::move(name), std::move(body)});
  }

  void start() override {
    for (auto& p : pending_) {
      threads_.emplace_back([fn = std::move(p.body)] { fn(); });
    }
    pending_.clear();
  }

  void join() override {
    for (auto& t : threads_)
      if (t.joinable()) t.join();
    threads_.clear();
  }

 private:
  struct Pending {
    std::string name;
    std::function<void()> body;
  };
  std::chrono::steady_clock::time_point epoch_;
  std::vector<Pending> pending_;
  std::vector<std::thread> threads_;
};

// ---------------------------------------------------------------------------
// Virtual time
//
// One OS thread per worker, but a single run token: exactly one worker
// executes at any instant. A blocked worker hands the token to the next
// runnable one (FIFO ready queue, then earliest (wake_at, seq) timer), so the
// schedule is a deterministic function of the program and virtual time only
// advances across sleeps and timed waits.

class VirtualRuntime;
class VirtMonitor;

struct VirtWorker {
  std::uint32_t id = 0;
  std::string name;
  std::function<void()> body;
  std::thread thread;
  std::condition_variable cv;
  bool run_token = false;

  enum class State { Ready, Running, Sleeping, Waiting, Done };
  State state = State::Ready;
  Nanos wake_at = 0;
  std::uint64_t timer_seq = 0;
  bool in_timer_heap = false;
  VirtMonitor* waiting_on = nullptr;
  bool timed_out = false;
  int monitors_held = 0;
};

class VirtMonitor final : public Monitor {
 public:
  explicit VirtMonitor(VirtualRuntime& rt) : rt_(rt) {}
  void lock() override;
  void unlock() override;
  void wait() override;
  bool wait_until(Nanos deadline) override;
  void notify_all() override;

 private:
  friend class VirtualRuntime;
  VirtualRuntime& rt_;
  std::deque<VirtWorker*> waiters_;
  VirtWorker* owner_ = nullptr;
};

class VirtualRuntime final : public Runtime {
 public:
  bool is_virtual() const override { return true; }

  Nanos now() override {
    if (current_) return now_;  // single runner: no race while it runs
    std::lock_guard<std::mutex> lk(mu_);
    return now_;
  }

  void sleep_for(Nanos d) override { sleep_until(now() + std::max<Nanos>(d, 0)); }

  void sleep_until(Nanos deadline) override {
    VirtWorker* w = require_current("sleep");
    std::unique_lock<std::mutex> lk(mu_);
    if (deadline <= now_) {
      w->state = VirtWorker::State::Ready;
      ready_.push_back(w);
    } else {
      w->state = VirtWorker::State::Sleeping;
      add_timer_locked(w, deadline);
    }
    block_current_locked(lk, w);
  }

  std::unique_ptr<Monitor> make_monitor() override {
    return std::make_unique<VirtMonitor>(*this);
  }

  void spawn(std::string name, std::function<void()> body) override {
    if (started_) die("spawn after start");
    auto w = std::make_unique<VirtWorker>();
    w->id = static_cast<std::uint32_t>(workers_.size());
    w->name = std::move(name);
    w->body = std::move(body);
    workers_.push_back(std::move(w));
  }

  void start() override {
    started_ = true;
    live_ = static_cast<int>(workers_.size());
    for (auto& w : workers_) {
      VirtWorker* wp = w.get();
      wp->thread = std::thread([this, wp] { worker_main(wp); });
    }
    std::unique_lock<std::mutex> lk(mu_);
    for (auto& w : workers_) ready_.push_back(w.get());
    schedule_next_locked();
  }

  void join() override {
    {
      std::unique_lock<std::mutex> lk(mu_);
      done_cv_.wait(lk, [this] { return live_ == 0; });
    }
    for (auto& w : workers_)
      if (w->thread.joinable()) w->thread.join();
  }

 private:
  friend class VirtMonitor;

  static thread_local VirtWorker* current_;

  [[noreturn]] static void die(const char* msg) {
    std::fprintf(stderr, "kps virtual runtime: %s\n", msg);
    std::abort();
  }

  VirtWorker* require_current(const char* what) {
    VirtWorker* w = current_;
    if (!w) die("blocking call outside a spawned worker");
    if (w->monitors_held != 0) {
      std::fprintf(stderr, "kps virtual runtime: worker '%s' blocked (%s) while holding a monitor\n",
                   w->name.c_str(), what);
      std::abort();
    }
    return w;
  }

  void worker_main(VirtWorker* w) {
    current_ = w;
    {
      std::unique_lock<std::mutex> lk(mu_);
      w->cv.wait(lk, [w] { return w->run_token; });
      w->run_token = false;
      w->state = VirtWorker::State::Running;
    }
    w->body();
    std::unique_lock<std::mutex> lk(mu_);
    w->state = VirtWorker::State::Done;
    --live_;
    if (live_ == 0) {
      done_cv_.notify_all();
    } else {
      schedule_next_locked();
    }
  }

  void add_timer_locked(VirtWorker* w, Nanos deadline) {
    w->wake_at = deadline;
    w->timer_seq = ++timer_seq_;
    w->in_timer_heap = true;
    timers_.emplace(deadline, w->timer_seq, w);
  }

  void remove_timer_locked(VirtWorker* w) {
    if (!w->in_timer_heap) return;
    timers_.erase({w->wake_at, w->timer_seq, w});
    w->in_timer_heap = false;
  }

  void schedule_next_locked() {
    VirtWorker* next = nullptr;
    if (!ready_.empty()) {
      next = ready_.front();
      ready_.pop_front();
    } else if (!timers_.empty()) {
      auto it = timers_.begin();
      next = std::get<2>(*it);
      now_ = std::max(now_, std::get<0>(*it));
      timers_.erase(it);
      next->in_timer_heap = false;
      if (next->waiting_on != nullptr) {
        // Timed monitor wait ran out: leave the wait set via the timeout path.
        auto& ws = next->waiting_on->waiters_;
        ws.erase(std::find(ws.begin(), ws.end(), next));
        next->waiting_on = nullptr;
        next->timed_out = true;
      }
    } else {
      if (live_ == 0) {
        done_cv_.notify_all();
        return;
      }
      std::fprintf(stderr, "kps virtual runtime: deadlock, %d workers blocked:\n", live_);
      for (auto& w : workers_) {
        if (w->state != VirtWorker::State::Done)
          std::fprintf(stderr, "  worker '%s' state=%d\n", w->name.c_str(),
                       static_cast<int>(w->state));
      }
      std::abort();
    }
    next->state = VirtWorker::State::Running;
    next->run_token = true;
    next->cv.notify_one();
  }

  // Pre: lk holds mu_, w's bookkeeping (state, timers, wait sets) is done.
  void block_current_locked(std::unique_lock<std::mutex>& lk, VirtWorker* w) {
    schedule_next_locked();
    w->cv.wait(lk, [w] { return w->run_token; });
    w->run_token = false;
    w->state = VirtWorker::State::Running;
  }

  std::mutex mu_;
  std::condition_variable done_cv_;
  std::vector<std::unique_ptr<VirtWorker>> workers_;
  std::deque<VirtWorker*> ready_;
  std::set<std::tuple<Nanos, std::uint64_t, VirtWorker*>> timers_;
  std::uint64_t timer_seq_ = 0;
  Nanos now_ = 0;
  bool started_ = false;
  int live_ = 0;
};

thread_local VirtWorker* VirtualRuntime::current_ = nullptr;

namespace {
// Sentinel owner for the main thread, which may touch monitors before
// start() and after join() (setup and report paths, no concurrency then).
VirtWorker* main_marker() {
  static VirtWorker marker;
  return &marker;
}
}  // namespace

void VirtMonitor::lock() {
  VirtWorker* w = VirtualRuntime::current_;
  if (owner_ != nullptr) VirtualRuntime::die("monitor already locked (recursive or leaked lock)");
  owner_ = w ? w : main_marker();
  if (w) ++w->monitors_held;
}

void VirtMonitor::unlock() {
  VirtWorker* w = VirtualRuntime::current_;
  if (owner_ != (w ? w : main_marker())) VirtualRuntime::die("monitor unlock by non-owner");
  owner_ = nullptr;
  if (w) --w->monitors_held;
}

void VirtMonitor::wait() {
  VirtWorker* w = VirtualRuntime::current_;
  if (owner_ != w) VirtualRuntime::die("monitor wait by non-owner");
  if (w->monitors_held != 1) VirtualRuntime::die("monitor wait while holding another monitor");
  owner_ = nullptr;
  --w->monitors_held;
  {
    std::unique_lock<std::mutex> lk(rt_.mu_);
    w->state = VirtWorker::State::Waiting;
    w->waiting_on = this;
    waiters_.push_back(w);
    rt_.block_current_locked(lk, w);
  }
  lock();
}

bool VirtMonitor::wait_until(Nanos deadline) {
  VirtWorker* w = VirtualRuntime::current_;
  if (owner_ != w) VirtualRuntime::die("monitor wait_until by non-owner");
  if (w->monitors_held != 1) VirtualRuntime::die("monitor wait while holding another monitor");
  if (deadline <= rt_.now()) return false;
  owner_ = nullptr;
  --w->monitors_held;
  bool notified;
  {
    std::unique_lock<std::mutex> lk(rt_.mu_);
    w->state = VirtWorker::State::Waiting;
    w->waiting_on = this;
    w->timed_out = false;
    waiters_.push_back(w);
    rt_.add_timer_locked(w, deadline);
    rt_.block_current_locked(lk, w);
    notified = !w->timed_out;
    w->timed_out = false;
  }
  lock();
  return notified;
}

void VirtMonitor::notify_all() {
  VirtWorker* w = VirtualRuntime::current_;
  if (owner_ != (w ? w : main_marker())) VirtualRuntime::die("monitor notify by non-owner");
  std::lock_guard<std::mutex> lk(rt_.mu_);
  for (VirtWorker* waiter : waiters_) {
    waiter->waiting_on = nullptr;
    rt_.remove_timer_locked(waiter);
    waiter->state = VirtWorker::State::Ready;
    rt_.ready_.push_back(waiter);
  }
  waiters_.clear();
}

}  // namespace

std::unique_ptr<Runtime> make_wallclock_runtime() {
  return std::make_unique<WallclockRuntime>();
}

std::unique_ptr<Runtime> make_virtual_runtime() { return std::make_unique<VirtualRuntime>(); }

std::unique_ptr<Runtime> make_runtime(bool virtual_time) {
  return virtual_time ? make_virtual_runtime() : make_wallclock_runtime();
}

}  // namespace kps

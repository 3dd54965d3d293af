#pragma once

// Brute-force reference models used as oracles. They replay the same
// operation traces as the real structures through the most literal
// implementation possible (full scans, plain maps) and expose victim traces
// for comparison. Kept independent of the library implementations.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kps_test {

struct ModelVictim {
  std::string key;
  std::int64_t ts;
  bool staged;
};

// Timestamp-ordered cache model: victim = smallest (timestamp, position seq);
// a larger position seq (more recently positioned) survives a timestamp tie.
class ModelTac {
 public:
  explicit ModelTac(std::size_t capacity) : capacity_(capacity) {}

  struct Ent {
    std::int64_t ts = 0;
    std::uint64_t seq = 0;
    std::string value;
    bool dirty = false;
    enum class Loc { List, Buffer, Draining } loc = Loc::List;
  };

  bool resident(const std::string& k) const { return ents_.count(k) != 0; }

  std::optional<std::string> get(const std::string& k) {
    auto it = ents_.find(k);
    if (it == ents_.end()) return std::nullopt;
    std::string v = it->second.value;
    if (it->second.loc != Ent::Loc::List) reinstate(it->first);
    return v;
  }

  void touch_access(const std::string& k, std::int64_t t) {
    auto it = ents_.find(k);
    if (it == ents_.end()) return;
    make_listed(it->first);
    it->second.ts = t;
    it->second.seq = ++seq_;
    trim();
  }

  void touch_future(const std::string& k, std::int64_t t) {
    auto it = ents_.find(k);
    if (it == ents_.end()) return;
    make_listed(it->first);
    it->second.ts = std::max(it->second.ts, t);
    it->second.seq = ++seq_;
    trim();
  }

  void insert(const std::string& k, std::string v, std::int64_t t, bool dirty) {
    Ent e;
    e.ts = t;
    e.seq = ++seq_;
    e.value = std::move(v);
    e.dirty = dirty;
    ents_[k] = std::move(e);
    trim();
  }

  bool write(const std::string& k, std::string v, std::int64_t t) {
    auto it = ents_.find(k);
    if (it == ents_.end()) return false;
    make_listed(it->first);
    it->second.value = std::move(v);
    it->second.dirty = true;
    it->second.ts = t;
    it->second.seq = ++seq_;
    trim();
    return true;
  }

  std::optional<std::pair<std::string, std::string>> pop_writeback() {
    if (buffer_.empty()) return std::nullopt;
    std::string k = buffer_.front();
    buffer_.pop_front();
    auto& e = ents_.at(k);
    e.loc = Ent::Loc::Draining;
    return std::make_pair(k, e.value);
  }

  void complete_writeback(const std::string& k) {
    auto it = ents_.find(k);
    if (it == ents_.end()) return;
    if (it->second.loc == Ent::Loc::Draining) ents_.erase(it);
    // else: reinstated while draining; keep it
  }

  // Contents of the ordered list, head -> tail (desc by (ts, seq)).
  std::vector<std::pair<std::string, std::int64_t>> list_desc() const {
    std::vector<std::pair<std::string, const Ent*>> rows;
    for (const auto& [k, e] : ents_)
      if (e.loc == Ent::Loc::List) rows.emplace_back(k, &e);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.second->ts != b.second->ts) return a.second->ts > b.second->ts;
      return a.second->seq > b.second->seq;
    });
    std::vector<std::pair<std::string, std::int64_t>> out;
    for (auto& [k, e] : rows) out.emplace_back(k, e->ts);
    return out;
  }

  std::vector<ModelVictim>& victims() { return victims_; }
  std::size_t list_size() const {
    std::size_t n = 0;
    for (const auto& [k, e] : ents_)
      if (e.loc == Ent::Loc::List) ++n;
    return n;
  }
  std::size_t buffer_size() const { return buffer_.size(); }

 private:
  void make_listed(const std::string& k) {
    auto& e = ents_.at(k);
    if (e.loc == Ent::Loc::Buffer)
      buffer_.erase(std::find(buffer_.begin(), buffer_.end(), k));
    e.loc = Ent::Loc::List;
  }

  void reinstate(const std::string& k) {
    auto& e = ents_.at(k);
    make_listed(k);
    e.seq = ++seq_;
    trim();
  }

  void trim() {
    for (;;) {
      std::string victim;
      const Ent* ve = nullptr;
      std::size_t listed = 0;
      for (const auto& [k, e] : ents_) {
        if (e.loc != Ent::Loc::List) continue;
        ++listed;
        if (!ve || e.ts < ve->ts || (e.ts == ve->ts && e.seq < ve->seq)) {
          ve = &e;
          victim = k;
        }
      }
      if (listed <= capacity_) return;
      auto& e = ents_.at(victim);
      victims_.push_back({victim, e.ts, e.dirty});
      if (e.dirty) {
        e.loc = Ent::Loc::Buffer;
        buffer_.push_back(victim);
      } else {
        ents_.erase(victim);
      }
    }
  }

  std::size_t capacity_;
  std::uint64_t seq_ = 0;
  std::map<std::string, Ent> ents_;
  std::deque<std::string> buffer_;
  std::vector<ModelVictim> victims_;
};

// Textbook LRU: most recent access at the front, victim at the back.
class ModelLru {
 public:
  explicit ModelLru(std::size_t capacity) : capacity_(capacity) {}

  bool resident(const std::string& k) const {
    return std::find(order_.begin(), order_.end(), k) != order_.end();
  }

  void access(const std::string& k) {
    auto it = std::find(order_.begin(), order_.end(), k);
    if (it == order_.end()) return;
    order_.erase(it);
    order_.push_front(k);
  }

  void insert(const std::string& k) {
    order_.push_front(k);
    while (order_.size() > capacity_) {
      victims_.push_back(order_.back());
      order_.pop_back();
    }
  }

  std::vector<std::string>& victims() { return victims_; }

 private:
  std::size_t capacity_;
  std::deque<std::string> order_;
  std::vector<std::string> victims_;
};

// Textbook second-chance Clock; entries enter with the reference bit set, a
// hit sets it, the hand clears bits until it finds an unreferenced slot.
class ModelClock {
 public:
  explicit ModelClock(std::size_t capacity) : capacity_(capacity) {}

  bool resident(const std::string& k) const {
    for (const auto& s : ring_)
      if (s.key == k) return true;
    return false;
  }

  void access(const std::string& k) {
    for (auto& s : ring_)
      if (s.key == k) s.ref = true;
  }

  void insert(const std::string& k) {
    if (ring_.size() < capacity_) {
      ring_.push_back({k, true});
      return;
    }
    for (;;) {
      auto& s = ring_[hand_];
      if (s.ref) {
        s.ref = false;
        hand_ = (hand_ + 1) % ring_.size();
        continue;
      }
      victims_.push_back(s.key);
      s = {k, true};
      hand_ = (hand_ + 1) % ring_.size();
      return;
    }
  }

  std::vector<std::string>& victims() { return victims_; }

 private:
  struct Slot {
    std::string key;
    bool ref;
  };
  std::size_t capacity_;
  std::vector<Slot> ring_;
  std::size_t hand_ = 0;
  std::vector<std::string> victims_;
};

// Event-time LRU: victim = smallest (last access event time, position seq).
class ModelEventTimeLru {
 public:
  explicit ModelEventTimeLru(std::size_t capacity) : capacity_(capacity) {}

  bool resident(const std::string& k) const { return ents_.count(k) != 0; }

  void access(const std::string& k, std::int64_t t) {
    auto it = ents_.find(k);
    if (it == ents_.end()) return;
    it->second = {t, ++seq_};
  }

  void insert(const std::string& k, std::int64_t t) {
    ents_[k] = {t, ++seq_};
    while (ents_.size() > capacity_) {
      auto vit = ents_.begin();
      for (auto it = ents_.begin(); it != ents_.end(); ++it) {
        if (it->second.first < vit->second.first ||
            (it->second.first == vit->second.first && it->second.second < vit->second.second))
          vit = it;
      }
      victims_.push_back(vit->first);
      ents_.erase(vit);
    }
  }

  std::vector<std::string>& victims() { return victims_; }

 private:
  std::size_t capacity_;
  std::uint64_t seq_ = 0;
  std::map<std::string, std::pair<std::int64_t, std::uint64_t>> ents_;
  std::vector<std::string> victims_;
};

}  // namespace kps_test

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kps/backend.hpp"

namespace kps {

enum class Origin { Accessed, Prefetched };

// An entry trimmed out of the ordered list. Clean victims are gone for good
// (staged=false); dirty victims moved to the eviction buffer (staged=true).
struct TacVictim {
  StateKey key;
  std::int64_t timestamp_ms = 0;
  Origin origin = Origin::Accessed;
  bool used = false;
  bool dirty = false;
  bool staged = false;
  int candidate = -1;
};

struct WritebackJob {
  StateKey key;
  std::string value;
  std::uint64_t version = 0;
};

// Entry that permanently left the cache after its writeback finished.
struct FinalEviction {
  StateKey key;
  Origin origin = Origin::Accessed;
  bool used = false;
  int candidate = -1;
};

struct TacOptions {
  std::size_t capacity = 1024;               // ordered-list entries
  std::size_t eviction_buffer_capacity = 0;  // 0 -> capacity/16, min 4
  bool count_bytes = false;                  // optional byte-budget mode
  std::size_t byte_capacity = 0;
};

// Timestamp-Aware Cache: hash index + doubly-linked list sorted descending by
// timestamp + eviction buffer for dirty victims awaiting writeback.
//
// Timestamps carry the policy: accessed entries hold their last-access event
// time, prefetched entries the event time they are expected to be used, so a
// single ordering ranks both kinds and the tail is always the stalest entry.
//
// Not thread-safe; the owning subtask serializes access and performs backend
// I/O outside its exclusion region (pop_writeback / complete_writeback).
class TimestampAwareCache {
 public:
  explicit TimestampAwareCache(TacOptions opt) : opt_(opt) {
    if (opt_.eviction_buffer_capacity == 0)
      opt_.eviction_buffer_capacity = std::max<std::size_t>(opt_.capacity / 16, 4);
  }

  const TacOptions& options() const { return opt_; }

  bool resident(const StateKey& key) const { return index_.count(key) != 0; }

  // Eviction-buffer and draining hits are reinstated into the list at their
  // timestamp position; list hits do not change order (only touches do).
  std::optional<std::string> get(const StateKey& key) {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    Node* n = it->second.get();
    std::string out = n->value;
    if (n->loc != Loc::InList) {
      detach(n);
      link_at_position(n);
      trim();
    }
    return out;
  }

  bool touch_access(const StateKey& key, std::int64_t t) {
    Node* n = find_or_count_absent(key);
    if (!n) return false;
    detach(n);
    n->timestamp_ms = t;
    n->used = true;
    link_at_position(n);
    trim();
    return true;
  }

  // Hint renewal: the timestamp only ever moves forward.
  bool touch_future(const StateKey& key, std::int64_t t) {
    Node* n = find_or_count_absent(key);
    if (!n) return false;
    detach(n);
    n->timestamp_ms = std::max(n->timestamp_ms, t);
    link_at_position(n);
    trim();
    return true;
  }

  // Pre: key not resident (the manager's buffer discipline guarantees it).
  void insert(const StateKey& key, std::string value, std::int64_t t, Origin origin, bool dirty,
              int candidate = -1) {
    auto n = std::make_unique<Node>();
    n->key = key;
    n->value = std::move(value);
    n->timestamp_ms = t;
    n->origin = origin;
    n->dirty = dirty;
    n->candidate = candidate;
    Node* np = n.get();
    index_.emplace(key, std::move(n));
    link_at_position(np);
    trim();
  }

  // Read-modify-write update; false (and no mutation) if the key is absent.
  bool write(const StateKey& key, std::string value, std::int64_t t) {
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    Node* n = it->second.get();
    detach(n);
    n->value = std::move(value);
    n->dirty = true;
    ++n->version;
    n->timestamp_ms = t;
    n->used = true;
    link_at_position(n);
    trim();
    return true;
  }

  // Hands the oldest staged entry to an I/O worker; the entry stays resolvable
  // through the index while the write is in flight.
  std::optional<WritebackJob> pop_writeback() {
    if (buffer_.empty()) return std::nullopt;
    Node* n = buffer_.front();
    buffer_.erase(buffer_.begin());
    n->loc = Loc::Draining;
    return WritebackJob{n->key, n->value, n->version};
  }

  // ok=false retries later (entry returns to the buffer). If the entry was
  // reinstated while the write was in flight, the completed write only marks
  // it clean when nothing modified the entry in between; an entry that got
  // evicted again meanwhile is discarded outright once its data is persisted.
  std::optional<FinalEviction> complete_writeback(const StateKey& key, std::uint64_t version,
                                                  bool ok) {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    Node* n = it->second.get();
    if (n->loc == Loc::Draining) {
      if (!ok) {
        n->loc = Loc::InBuffer;
        buffer_.push_back(n);
        return std::nullopt;
      }
      FinalEviction ev{n->key, n->origin, n->used, n->candidate};
      index_.erase(n->key);
      return ev;
    }
    if (ok && n->version == version) {
      n->dirty = false;
      if (n->loc == Loc::InBuffer) {
        buffer_.erase(std::find(buffer_.begin(), buffer_.end(), n));
        FinalEviction ev{n->key, n->origin, n->used, n->candidate};
        index_.erase(n->key);
        return ev;
      }
    }
    return std::nullopt;
  }

  // Flush support: copies of every dirty list entry.
  std::vector<WritebackJob> dirty_snapshot() const {
    std::vector<WritebackJob> out;
    for (Node* n = head_; n; n = n->next)
      if (n->dirty) out.push_back({n->key, n->value, n->version});
    return out;
  }

  bool mark_clean(const StateKey& key, std::uint64_t version) {
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    Node* n = it->second.get();
    if (n->version != version) return false;
    n->dirty = false;
    return true;
  }

  std::vector<TacVictim> take_victims() { return std::move(victims_); }

  std::size_t size() const { return list_size_; }
  std::size_t eviction_buffer_size() const { return buffer_.size(); }
  std::size_t total_entries() const { return index_.size(); }
  std::size_t list_bytes() const { return bytes_; }
  std::uint64_t touch_absent_count() const { return touch_absent_; }
  bool eviction_buffer_over_bound() const {
    return buffer_.size() > opt_.eviction_buffer_capacity;
  }

  // head -> tail (timestamps non-increasing); for order-oracle tests.
  std::vector<std::pair<StateKey, std::int64_t>> list_snapshot() const {
    std::vector<std::pair<StateKey, std::int64_t>> out;
    out.reserve(list_size_);
    for (Node* n = head_; n; n = n->next) out.emplace_back(n->key, n->timestamp_ms);
    return out;
  }

  // Entries resident anywhere (list, buffer, draining), with metadata.
  struct EntryView {
    StateKey key;
    std::int64_t timestamp_ms;
    Origin origin;
    bool used;
    bool dirty;
    int candidate;
  };
  std::optional<EntryView> meta(const StateKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    const Node* n = it->second.get();
    return EntryView{n->key, n->timestamp_ms, n->origin, n->used, n->dirty, n->candidate};
  }
  std::vector<EntryView> all_entries() const {
    std::vector<EntryView> out;
    out.reserve(index_.size());
    for (const auto& [k, n] : index_)
      out.push_back({n->key, n->timestamp_ms, n->origin, n->used, n->dirty, n->candidate});
    return out;
  }

 private:
  enum class Loc { InList, InBuffer, Draining };

  struct Node {
    StateKey key;
    std::string value;
    std::int64_t timestamp_ms = 0;
    std::uint64_t pos_seq = 0;
    std::uint64_t version = 0;
    Origin origin = Origin::Accessed;
    bool dirty = false;
    bool used = false;
    int candidate = -1;
    Loc loc = Loc::InList;
    Node* prev = nullptr;
    Node* next = nullptr;
  };

  Node* find_or_count_absent(const StateKey& key) {
    auto it = index_.find(key);
    if (it == index_.end()) {
      ++touch_absent_;
      return nullptr;
    }
    return it->second.get();
  }

  // Removes the node from whichever structure holds it; never frees.
  void detach(Node* n) {
    if (n->loc == Loc::InList) {
      unlink(n);
    } else if (n->loc == Loc::InBuffer) {
      buffer_.erase(std::find(buffer_.begin(), buffer_.end(), n));
    }
    // Draining: held by the in-flight writeback only; version check resolves it.
  }

  // Insert into the descending list. Equal timestamps: the entry positioned
  // most recently sits closer to the head (pos_seq is the secondary key).
  void link_at_position(Node* n) {
    n->pos_seq = ++pos_counter_;
    n->loc = Loc::InList;
    Node* cur = head_;
    while (cur && cur->timestamp_ms > n->timestamp_ms) cur = cur->next;
    n->next = cur;
    n->prev = cur ? cur->prev : tail_;
    if (n->prev)
      n->prev->next = n;
    else
      head_ = n;
    if (cur)
      cur->prev = n;
    else
      tail_ = n;
    ++list_size_;
    bytes_ += n->value.size();
  }

  void unlink(Node* n) {
    if (n->prev)
      n->prev->next = n->next;
    else
      head_ = n->next;
    if (n->next)
      n->next->prev = n->prev;
    else
      tail_ = n->prev;
    n->prev = n->next = nullptr;
    --list_size_;
    bytes_ -= n->value.size();
  }

  bool over_capacity() const {
    if (opt_.count_bytes) return bytes_ > opt_.byte_capacity && list_size_ > 1;
    return list_size_ > opt_.capacity;
  }

  void trim() {
    while (list_size_ > 0 && over_capacity()) {
      Node* victim = tail_;
      unlink(victim);
      TacVictim v{victim->key, victim->timestamp_ms, victim->origin,
                  victim->used, victim->dirty,        victim->dirty,
                  victim->candidate};
      victims_.push_back(v);
      if (victim->dirty) {
        victim->loc = Loc::InBuffer;
        buffer_.push_back(victim);
      } else {
        index_.erase(victim->key);
      }
    }
  }

  TacOptions opt_;
  std::unordered_map<StateKey, std::unique_ptr<Node>, StateKeyHash> index_;
  Node* head_ = nullptr;
  Node* tail_ = nullptr;
  std::size_t list_size_ = 0;
  std::size_t bytes_ = 0;
  std::vector<Node*> buffer_;  // FIFO of dirty victims awaiting writeback
  std::vector<TacVictim> victims_;
  std::uint64_t pos_counter_ = 0;
  std::uint64_t touch_absent_ = 0;
};

}  // namespace kps

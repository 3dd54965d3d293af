#pragma once

#include <algorithm>
#include <list>
#include <unordered_map>

#include "kps/cache.hpp"

namespace kps {

// Classic LRU over access arrival order (not event time). Dirty victims go
// through the same staged-writeback path as the timestamp-aware cache.
class LruCache final : public StateCache {
 public:
  LruCache(std::size_t capacity, std::size_t buffer_bound)
      : capacity_(capacity ? capacity : 1),
        buffer_bound_(buffer_bound ? buffer_bound : std::max<std::size_t>(capacity_ / 16, 4)) {}

  bool resident(const StateKey& key) const override { return index_.count(key) != 0; }

  std::optional<std::string> get(const StateKey& key) override {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    Node* n = it->second.get();
    std::string out = n->value;
    if (n->loc != Loc::InList) {
      detach(n);
      push_front(n);
      trim();
    }
    return out;
  }

  void on_access(const StateKey& key, std::int64_t t) override {
    auto it = index_.find(key);
    if (it == index_.end()) return;
    Node* n = it->second.get();
    detach(n);
    n->timestamp_ms = t;
    n->used = true;
    push_front(n);
    trim();
  }

  void insert(const StateKey& key, std::string value, std::int64_t t, Origin origin, bool dirty,
              int candidate) override {
    auto n = std::make_unique<Node>();
    n->key = key;
    n->value = std::move(value);
    n->timestamp_ms = t;
    n->origin = origin;
    n->dirty = dirty;
    n->candidate = candidate;
    Node* np = n.get();
    index_.emplace(key, std::move(n));
    push_front(np);
    trim();
  }

  bool write(const StateKey& key, std::string value, std::int64_t t) override {
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    Node* n = it->second.get();
    detach(n);
    n->value = std::move(value);
    n->dirty = true;
    ++n->version;
    n->timestamp_ms = t;
    n->used = true;
    push_front(n);
    trim();
    return true;
  }

  std::optional<WritebackJob> pop_writeback() override {
    if (buffer_.empty()) return std::nullopt;
    Node* n = buffer_.front();
    buffer_.erase(buffer_.begin());
    n->loc = Loc::Draining;
    return WritebackJob{n->key, n->value, n->version};
  }

  std::optional<FinalEviction> complete_writeback(const StateKey& key, std::uint64_t version,
                                                  bool ok) override {
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
    if (ok && n->version == version) n->dirty = false;
    return std::nullopt;
  }

  std::vector<WritebackJob> dirty_snapshot() const override {
    std::vector<WritebackJob> out;
    for (Node* n = head_; n; n = n->next)
      if (n->dirty) out.push_back({n->key, n->value, n->version});
    return out;
  }

  bool mark_clean(const StateKey& key, std::uint64_t version) override {
    auto it = index_.find(key);
    if (it == index_.end() || it->second->version != version) return false;
    it->second->dirty = false;
    return true;
  }

  std::vector<TacVictim> take_victims() override { return std::move(victims_); }
  std::size_t size() const override { return list_size_; }
  std::size_t eviction_buffer_size() const override { return buffer_.size(); }
  std::size_t eviction_buffer_bound() const override { return buffer_bound_; }
  std::optional<Meta> peek(const StateKey& key) const override {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return Meta{it->second->origin, it->second->used, it->second->dirty};
  }
  std::vector<std::pair<StateKey, Meta>> entries() const override {
    std::vector<std::pair<StateKey, Meta>> out;
    for (const auto& [k, n] : index_) out.emplace_back(k, Meta{n->origin, n->used, n->dirty});
    return out;
  }

 private:
  enum class Loc { InList, InBuffer, Draining };

  struct Node {
    StateKey key;
    std::string value;
    std::int64_t timestamp_ms = 0;
    std::uint64_t version = 0;
    Origin origin = Origin::Accessed;
    bool dirty = false;
    bool used = false;
    int candidate = -1;
    Loc loc = Loc::InList;
    Node* prev = nullptr;
    Node* next = nullptr;
  };

  void detach(Node* n) {
    if (n->loc == Loc::InList) {
      unlink(n);
    } else if (n->loc == Loc::InBuffer) {
      buffer_.erase(std::find(buffer_.begin(), buffer_.end(), n));
    }
  }

  void push_front(Node* n) {
    n->loc = Loc::InList;
    n->prev = nullptr;
    n->next = head_;
    if (head_)
      head_->prev = n;
    else
      tail_ = n;
    head_ = n;
    ++list_size_;
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
  }

  void trim() {
    while (list_size_ > capacity_) {
      Node* victim = tail_;
      unlink(victim);
      victims_.push_back({victim->key, victim->timestamp_ms, victim->origin, victim->used,
                          victim->dirty, victim->dirty, victim->candidate});
      if (victim->dirty) {
        victim->loc = Loc::InBuffer;
        buffer_.push_back(victim);
      } else {
        index_.erase(victim->key);
      }
    }
  }

  std::size_t capacity_;
  std::size_t buffer_bound_;
  std::unordered_map<StateKey, std::unique_ptr<Node>, StateKeyHash> index_;
  Node* head_ = nullptr;
  Node* tail_ = nullptr;
  std::size_t list_size_ = 0;
  std::vector<Node*> buffer_;
  std::vector<TacVictim> victims_;
};

}  // namespace kps

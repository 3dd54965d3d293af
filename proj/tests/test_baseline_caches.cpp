#include <string>

#include "doctest.h"
#include "kps/clock_cache.hpp"
#include "kps/lru.hpp"
#include "kps/rng.hpp"
#include "support/models.hpp"

using namespace kps;

namespace {
StateKey sk(const std::string& k) { return StateKey{k, 0}; }
}  // namespace

TEST_CASE("lru: textbook eviction order") {
  LruCache lru(2, 4);
  lru.insert(sk("a"), "", 0, Origin::Accessed, false, -1);
  lru.insert(sk("b"), "", 0, Origin::Accessed, false, -1);
  lru.on_access(sk("a"), 0);
  lru.insert(sk("c"), "", 0, Origin::Accessed, false, -1);
  auto v = lru.take_victims();
  REQUIRE(v.size() == 1);
  CHECK(v[0].key == sk("b"));
  CHECK(lru.resident(sk("a")));
  CHECK(lru.resident(sk("c")));
}

TEST_CASE("lru: re-access promotes to most recent") {
  LruCache lru(3, 4);
  lru.insert(sk("a"), "", 0, Origin::Accessed, false, -1);
  lru.insert(sk("b"), "", 0, Origin::Accessed, false, -1);
  lru.insert(sk("c"), "", 0, Origin::Accessed, false, -1);
  lru.on_access(sk("a"), 0);
  lru.insert(sk("d"), "", 0, Origin::Accessed, false, -1);  // evicts b
  lru.insert(sk("e"), "", 0, Origin::Accessed, false, -1);  // evicts c
  auto v = lru.take_victims();
  REQUIRE(v.size() == 2);
  CHECK(v[0].key == sk("b"));
  CHECK(v[1].key == sk("c"));
}

TEST_CASE("clock: all bits set -> full sweep evicts the original hand position") {
  ClockCache clock(3, 4);
  clock.insert(sk("a"), "", 0, Origin::Accessed, false, -1);
  clock.insert(sk("b"), "", 0, Origin::Accessed, false, -1);
  clock.insert(sk("c"), "", 0, Origin::Accessed, false, -1);
  // All three have ref=1 (inserted referenced). Hand at slot 0.
  clock.insert(sk("d"), "", 0, Origin::Accessed, false, -1);
  auto v = clock.take_victims();
  REQUIRE(v.size() == 1);
  CHECK(v[0].key == sk("a"));
}

TEST_CASE("clock: a hit never evicts") {
  ClockCache clock(2, 4);
  clock.insert(sk("a"), "", 0, Origin::Accessed, false, -1);
  clock.insert(sk("b"), "", 0, Origin::Accessed, false, -1);
  for (int i = 0; i < 10; ++i) {
    clock.on_access(sk("a"), 0);
    clock.on_access(sk("b"), 0);
  }
  CHECK(clock.take_victims().empty());
}

TEST_CASE("lru random traces match the reference model") {
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t cap = 4 + rng.below(64);
    LruCache lru(cap, 8);
    kps_test::ModelLru model(cap);
    for (int i = 0; i < 2000; ++i) {
      std::string k = "k" + std::to_string(rng.below(96));
      if (lru.resident(sk(k))) {
        REQUIRE(model.resident(k));
        lru.on_access(sk(k), i);
        model.access(k);
      } else {
        REQUIRE_FALSE(model.resident(k));
        lru.insert(sk(k), "", i, Origin::Accessed, false, -1);
        model.insert(k);
      }
    }
    auto victims = lru.take_victims();
    auto& mv = model.victims();
    REQUIRE(victims.size() == mv.size());
    for (std::size_t i = 0; i < mv.size(); ++i)
      CHECK(victims[i].key.partition_key == mv[i]);
  }
}

TEST_CASE("clock random traces match the reference model") {
  Rng rng(505);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t cap = 4 + rng.below(64);
    ClockCache clock(cap, 8);
    kps_test::ModelClock model(cap);
    for (int i = 0; i < 2000; ++i) {
      std::string k = "k" + std::to_string(rng.below(96));
      if (clock.resident(sk(k))) {
        REQUIRE(model.resident(k));
        clock.on_access(sk(k), i);
        model.access(k);
      } else {
        REQUIRE_FALSE(model.resident(k));
        clock.insert(sk(k), "", i, Origin::Accessed, false, -1);
        model.insert(k);
      }
    }
    auto victims = clock.take_victims();
    auto& mv = model.victims();
    REQUIRE(victims.size() == mv.size());
    for (std::size_t i = 0; i < mv.size(); ++i)
      CHECK(victims[i].key.partition_key == mv[i]);
  }
}

TEST_CASE("dirty victims stage through the shared writeback buffer") {
  LruCache lru(1, 4);
  lru.insert(sk("a"), "va", 0, Origin::Accessed, true, -1);
  lru.insert(sk("b"), "vb", 0, Origin::Accessed, false, -1);
  CHECK(lru.eviction_buffer_size() == 1);
  CHECK(lru.get(sk("a")) == "va");  // reinstate out of the buffer
  CHECK(lru.eviction_buffer_size() == 0);
  auto v = lru.take_victims();
  REQUIRE(v.size() == 2);  // a staged, then b trimmed by the reinstate
  CHECK(v[0].key == sk("a"));
  CHECK(v[0].staged);
  CHECK(v[1].key == sk("b"));
}

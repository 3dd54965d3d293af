#include <string>

#include "doctest.h"
#include "kps/rng.hpp"
#include "kps/tac.hpp"
#include "support/models.hpp"

using namespace kps;
using kps_test::ModelTac;

namespace {

StateKey sk(const std::string& k) { return StateKey{k, 0}; }

TacOptions opts(std::size_t cap) {
  TacOptions o;
  o.capacity = cap;
  return o;
}

}  // namespace

TEST_CASE("get returns state without reordering; absent key is absent") {
  TimestampAwareCache tac(opts(4));
  tac.insert(sk("a"), "va", 9, Origin::Accessed, false);
  tac.insert(sk("b"), "vb", 5, Origin::Accessed, false);
  auto before = tac.list_snapshot();
  CHECK(tac.get(sk("a")) == "va");
  CHECK(tac.list_snapshot() == before);
  CHECK_FALSE(tac.get(sk("zz")).has_value());
}

TEST_CASE("touch_access repositions by new timestamp") {
  TimestampAwareCache tac(opts(8));
  tac.insert(sk("a"), "", 9, Origin::Accessed, false);
  tac.insert(sk("b"), "", 5, Origin::Accessed, false);
  tac.insert(sk("c"), "", 3, Origin::Accessed, false);
  REQUIRE(tac.touch_access(sk("b"), 11));
  auto snap = tac.list_snapshot();
  REQUIRE(snap.size() == 3);
  CHECK(snap[0].second == 11);
  CHECK(snap[0].first == sk("b"));
  CHECK(snap[1].second == 9);
  CHECK(snap[2].second == 3);
}

TEST_CASE("touch with the head's timestamp lands adjacent to the head (most recent first)") {
  TimestampAwareCache tac(opts(8));
  tac.insert(sk("a"), "", 9, Origin::Accessed, false);
  tac.insert(sk("b"), "", 5, Origin::Accessed, false);
  REQUIRE(tac.touch_access(sk("b"), 9));
  auto snap = tac.list_snapshot();
  // b was positioned after a, same timestamp: b is closer to the head.
  CHECK(snap[0].first == sk("b"));
  CHECK(snap[1].first == sk("a"));
}

TEST_CASE("touching an absent key is a counted no-op") {
  TimestampAwareCache tac(opts(4));
  CHECK_FALSE(tac.touch_access(sk("nope"), 3));
  CHECK_FALSE(tac.touch_future(sk("nope"), 3));
  CHECK(tac.touch_absent_count() == 2);
}

TEST_CASE("touch_future applies the max rule and renewal defers eviction") {
  TimestampAwareCache tac(opts(8));
  tac.insert(sk("k"), "", 5, Origin::Prefetched, false);
  REQUIRE(tac.touch_future(sk("k"), 20));
  CHECK(tac.list_snapshot()[0].second == 20);
  REQUIRE(tac.touch_future(sk("k"), 2));
  CHECK(tac.list_snapshot()[0].second == 20);  // unchanged, max rule

  // The renewed entry survives an eviction wave that removes all t < 10.
  TimestampAwareCache tac2(opts(2));
  tac2.insert(sk("old"), "", 4, Origin::Accessed, false);
  tac2.insert(sk("renewed"), "", 5, Origin::Prefetched, false);
  tac2.touch_future(sk("renewed"), 30);
  tac2.insert(sk("new1"), "", 12, Origin::Accessed, false);  // evicts t=4, not the renewed one
  CHECK(tac2.resident(sk("renewed")));
  CHECK_FALSE(tac2.resident(sk("old")));
}

TEST_CASE("insert evicts the smallest timestamp; clean victims are discarded") {
  TimestampAwareCache tac(opts(2));
  tac.insert(sk("a"), "", 9, Origin::Accessed, false);
  tac.insert(sk("b"), "", 5, Origin::Accessed, false);
  tac.insert(sk("c"), "", 7, Origin::Accessed, false);
  auto snap = tac.list_snapshot();
  REQUIRE(snap.size() == 2);
  CHECK(snap[0].second == 9);
  CHECK(snap[1].second == 7);
  auto victims = tac.take_victims();
  REQUIRE(victims.size() == 1);
  CHECK(victims[0].key == sk("b"));
  CHECK_FALSE(victims[0].staged);
  CHECK(tac.eviction_buffer_size() == 0);
}

TEST_CASE("dirty victim goes to the eviction buffer and stays resolvable") {
  TimestampAwareCache tac(opts(2));
  tac.insert(sk("a"), "va", 9, Origin::Accessed, false);
  tac.insert(sk("b"), "vb", 5, Origin::Accessed, true);
  tac.insert(sk("c"), "vc", 7, Origin::Accessed, false);
  auto victims = tac.take_victims();
  REQUIRE(victims.size() == 1);
  CHECK(victims[0].key == sk("b"));
  CHECK(victims[0].staged);
  CHECK(tac.eviction_buffer_size() == 1);
  CHECK(tac.resident(sk("b")));
  // An out-of-order access drops a's timestamp below b's.
  REQUIRE(tac.touch_access(sk("a"), 3));
  // Read of a staged key reinstates it into the list at its timestamp.
  CHECK(tac.get(sk("b")) == "vb");
  CHECK(tac.eviction_buffer_size() == 0);
  auto v2 = tac.take_victims();
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].key == sk("a"));  // t=3 is now the smallest
  auto snap = tac.list_snapshot();
  REQUIRE(snap.size() == 2);
  CHECK(snap[0].first == sk("c"));
  CHECK(snap[1].first == sk("b"));
}

TEST_CASE("insert below the current tail at capacity trims the new entry itself") {
  TimestampAwareCache tac(opts(2));
  tac.insert(sk("a"), "", 9, Origin::Accessed, false);
  tac.insert(sk("b"), "", 7, Origin::Accessed, false);
  tac.insert(sk("late"), "", 3, Origin::Prefetched, false);
  auto victims = tac.take_victims();
  REQUIRE(victims.size() == 1);
  CHECK(victims[0].key == sk("late"));
  CHECK_FALSE(tac.resident(sk("late")));
}

TEST_CASE("write marks dirty, two writes keep one entry with the latest value") {
  TimestampAwareCache tac(opts(4));
  CHECK_FALSE(tac.write(sk("k"), "v", 1));  // write to non-resident state
  tac.insert(sk("k"), "v0", 1, Origin::Accessed, false);
  REQUIRE(tac.write(sk("k"), "v1", 2));
  REQUIRE(tac.write(sk("k"), "v2", 3));
  CHECK(tac.get(sk("k")) == "v2");
  CHECK(tac.size() == 1);
  auto dirty = tac.dirty_snapshot();
  REQUIRE(dirty.size() == 1);
  CHECK(dirty[0].value == "v2");
}

TEST_CASE("writeback drain: value reaches the backend path exactly once") {
  TimestampAwareCache tac(opts(1));
  tac.insert(sk("k"), "v0", 1, Origin::Accessed, false);
  REQUIRE(tac.write(sk("k"), "v1", 2));
  tac.insert(sk("x"), "", 5, Origin::Accessed, false);  // evicts dirty k
  REQUIRE(tac.eviction_buffer_size() == 1);

  auto job = tac.pop_writeback();
  REQUIRE(job.has_value());
  CHECK(job->key == sk("k"));
  CHECK(job->value == "v1");
  auto fin = tac.complete_writeback(job->key, job->version, true);
  REQUIRE(fin.has_value());
  CHECK_FALSE(tac.resident(sk("k")));
  CHECK(tac.pop_writeback() == std::nullopt);  // drain(0 left) -> nothing
}

TEST_CASE("reinstate during drain: write happens before reinstatement or is skipped") {
  TimestampAwareCache tac(opts(2));
  tac.insert(sk("k"), "v1", 1, Origin::Accessed, true);
  tac.insert(sk("x"), "", 5, Origin::Accessed, false);
  tac.insert(sk("y"), "", 6, Origin::Accessed, false);  // evicts dirty k -> staged
  REQUIRE(tac.eviction_buffer_size() == 1);
  auto job = tac.pop_writeback();
  REQUIRE(job.has_value());

  SUBCASE("untouched while draining: entry re-marked clean") {
    // An access reinstates it with a fresh timestamp so it stays listed.
    REQUIRE(tac.touch_access(sk("k"), 9));
    auto fin = tac.complete_writeback(job->key, job->version, true);
    CHECK_FALSE(fin.has_value());  // not a final eviction
    CHECK(tac.resident(sk("k")));
    CHECK(tac.dirty_snapshot().empty());  // clean now
  }

  SUBCASE("rewritten while draining: stays dirty, no lost update") {
    REQUIRE(tac.write(sk("k"), "v2", 9));
    auto fin = tac.complete_writeback(job->key, job->version, true);
    CHECK_FALSE(fin.has_value());
    auto dirty = tac.dirty_snapshot();
    REQUIRE(dirty.size() == 1);
    CHECK(dirty[0].value == "v2");
  }

  SUBCASE("failed write returns the entry to the buffer") {
    auto fin = tac.complete_writeback(job->key, job->version, false);
    CHECK_FALSE(fin.has_value());
    CHECK(tac.eviction_buffer_size() == 1);
    CHECK(tac.resident(sk("k")));
  }
}

TEST_CASE("flush is idempotent: second pass finds nothing dirty") {
  TimestampAwareCache tac(opts(20));
  for (int i = 0; i < 20; ++i)
    tac.insert(sk("k" + std::to_string(i)), "v", i, Origin::Accessed, i < 5);
  CHECK(tac.dirty_snapshot().size() == 5);
  for (auto& job : tac.dirty_snapshot()) tac.mark_clean(job.key, job.version);
  CHECK(tac.dirty_snapshot().empty());
}

TEST_CASE("order oracle: random operation traces match the brute-force model") {
  // Scaled-down version of the acceptance criterion, for quick iteration.
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t cap = 4 + rng.below(61);
    std::size_t nkeys = 2 + rng.below(101);
    TimestampAwareCache tac(opts(cap));
    ModelTac model(cap);
    std::vector<TacVictim> real_victims;

    for (int op = 0; op < 1200; ++op) {
      std::string k = "k" + std::to_string(rng.below(nkeys));
      std::int64_t t = static_cast<std::int64_t>(rng.below(500));
      switch (rng.below(100) % 10) {
        case 0:
        case 1:
        case 2:
          if (!tac.resident(sk(k))) {
            bool dirty = rng.bernoulli(0.4);
            tac.insert(sk(k), "v", t, Origin::Accessed, dirty);
            model.insert(k, "v", t, dirty);
          }
          break;
        case 3:
        case 4:
          if (tac.resident(sk(k))) {
            tac.touch_access(sk(k), t);
            model.touch_access(k, t);
          }
          break;
        case 5:
          if (tac.resident(sk(k))) {
            tac.touch_future(sk(k), t);
            model.touch_future(k, t);
          }
          break;
        case 6: {
          auto a = tac.get(sk(k));
          auto b = model.get(k);
          REQUIRE(a.has_value() == b.has_value());
          break;
        }
        case 7:
          if (tac.resident(sk(k))) {
            tac.write(sk(k), "w", t);
            model.write(k, "w", t);
          }
          break;
        case 8: {
          auto job = tac.pop_writeback();
          auto mjob = model.pop_writeback();
          REQUIRE(job.has_value() == mjob.has_value());
          if (job) {
            REQUIRE(job->key.partition_key == mjob->first);
            tac.complete_writeback(job->key, job->version, true);
            model.complete_writeback(mjob->first);
          }
          break;
        }
        default:
          break;
      }
      for (auto& v : tac.take_victims()) real_victims.push_back(v);
    }

    // Victim traces identical.
    auto& mv = model.victims();
    REQUIRE(real_victims.size() == mv.size());
    for (std::size_t i = 0; i < mv.size(); ++i) {
      CHECK(real_victims[i].key.partition_key == mv[i].key);
      CHECK(real_victims[i].timestamp_ms == mv[i].ts);
      CHECK(real_victims[i].staged == mv[i].staged);
    }

    // List contents equal the model's and are sorted non-increasing.
    auto snap = tac.list_snapshot();
    auto msnap = model.list_desc();
    REQUIRE(snap.size() == msnap.size());
    for (std::size_t i = 0; i < snap.size(); ++i) {
      CHECK(snap[i].first.partition_key == msnap[i].first);
      CHECK(snap[i].second == msnap[i].second);
      if (i > 0) CHECK(snap[i - 1].second >= snap[i].second);
    }
    CHECK(tac.size() <= cap);
  }
}

TEST_CASE("degeneration: without future hints the victims equal event-time LRU") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t cap = 4 + rng.below(32);
    TimestampAwareCache tac(opts(cap));
    kps_test::ModelEventTimeLru lru(cap);
    std::int64_t t = 0;
    for (int op = 0; op < 2000; ++op) {
      std::string k = "k" + std::to_string(rng.below(64));
      ++t;
      if (tac.resident(sk(k))) {
        tac.touch_access(sk(k), t);
        lru.access(k, t);
      } else {
        tac.insert(sk(k), "v", t, Origin::Accessed, false);
        lru.insert(k, t);
      }
    }
    auto victims = tac.take_victims();
    auto& lv = lru.victims();
    REQUIRE(victims.size() == lv.size());
    for (std::size_t i = 0; i < victims.size(); ++i)
      CHECK(victims[i].key.partition_key == lv[i]);
  }
}

TEST_CASE("byte-budget mode trims by summed state size") {
  TacOptions o;
  o.capacity = 1000;
  o.count_bytes = true;
  o.byte_capacity = 10;
  TimestampAwareCache tac(o);
  tac.insert(sk("a"), "aaaa", 5, Origin::Accessed, false);  // 4 bytes
  tac.insert(sk("b"), "bbbb", 9, Origin::Accessed, false);  // 8 total
  tac.insert(sk("c"), "cccc", 7, Origin::Accessed, false);  // 12 -> evict t=5
  CHECK_FALSE(tac.resident(sk("a")));
  CHECK(tac.list_bytes() == 8);
}

#include "doctest.h"
#include "kps/hints.hpp"
#include "kps/slack.hpp"

using namespace kps;

TEST_CASE("hints buffer dedups per key and keeps the max event time") {
  HintsBuffer buf(16);
  CHECK(buf.admit("k", 10, 0) == HintsBuffer::Admit::Inserted);
  CHECK(buf.admit("k", 7, 0) == HintsBuffer::Admit::RaisedUnprocessed);
  auto e = buf.pop_earliest_to_in_flight();
  REQUIRE(e.has_value());
  CHECK(e->event_time_ms == 10);  // max(10, 7)
  CHECK(buf.in_flight("k"));
  CHECK(buf.size() == 1);
}

TEST_CASE("pop order is smallest event time first") {
  HintsBuffer buf(16);
  buf.admit("a", 5, 0);
  buf.admit("b", 3, 0);
  buf.admit("c", 9, 0);
  CHECK(buf.pop_earliest_to_in_flight()->key == "b");
  CHECK(buf.pop_earliest_to_in_flight()->key == "a");
  CHECK(buf.pop_earliest_to_in_flight()->key == "c");
}

TEST_CASE("a late hint for an in-flight key raises the timestamp used at completion") {
  HintsBuffer buf(16);
  buf.admit("k", 10, 0);
  buf.pop_earliest_to_in_flight();
  CHECK(buf.admit("k", 25, 0) == HintsBuffer::Admit::RaisedInFlight);
  auto done = buf.complete_in_flight("k");
  REQUIRE(done.has_value());
  CHECK(done->event_time_ms == 25);
  CHECK(buf.size() == 0);
}

TEST_CASE("overflow evicts the smallest-event-time unprocessed entry") {
  HintsBuffer buf(2);
  buf.admit("a", 5, 0);
  buf.admit("b", 3, 0);
  CHECK(buf.admit("c", 9, 0) == HintsBuffer::Admit::Inserted);
  CHECK(buf.size() == 2);
  CHECK_FALSE(buf.buffered("b"));  // b had the smallest event time
  CHECK(buf.buffered("a"));
  CHECK(buf.buffered("c"));
}

TEST_CASE("erase_unprocessed removes a pending hint after a synchronous fetch") {
  HintsBuffer buf(8);
  buf.admit("k", 5, 0);
  CHECK(buf.erase_unprocessed("k"));
  CHECK(buf.size() == 0);
  CHECK_FALSE(buf.erase_unprocessed("k"));
}

TEST_CASE("reservoir percentile is exact over its contents") {
  Reservoir r(128);
  for (int i = 1; i <= 100; ++i) r.push(i);
  CHECK(r.percentile(0.0) == doctest::Approx(1));
  CHECK(r.percentile(1.0) == doctest::Approx(100));
  CHECK(r.percentile(0.5) == doctest::Approx(50).epsilon(0.03));
  CHECK(r.percentile(0.99) == doctest::Approx(99).epsilon(0.02));
}

TEST_CASE("reservoir overwrites oldest samples once full") {
  Reservoir r(4);
  for (int i = 0; i < 4; ++i) r.push(1);
  for (int i = 0; i < 4; ++i) r.push(9);
  CHECK(r.percentile(0.0) == 9);  // all old samples displaced
  CHECK(r.total() == 8);
}

TEST_CASE("selection rule: worked example {80,40,10}/20/5 picks the second candidate") {
  std::vector<CandidateSlack> cands = {
      {0, 80, true}, {1, 40, true}, {2, 10, true}};
  auto r = select_lookahead(cands, 20, 5);
  REQUIRE(r.has_value());
  CHECK(r->op == 1);  // latest with G >= 25
  CHECK(r->satisfied);
}

TEST_CASE("selection rule: single candidate meeting the rule is a fixed point") {
  std::vector<CandidateSlack> cands = {{3, 50, true}};
  auto r = select_lookahead(cands, 20, 5);
  REQUIRE(r.has_value());
  CHECK(r->op == 3);
  CHECK(r->satisfied);
}

TEST_CASE("selection rule: nothing qualifies -> earliest remaining, flagged") {
  std::vector<CandidateSlack> cands = {
      {0, 10, true}, {1, 8, true}, {2, 2, true}};
  auto r = select_lookahead(cands, 20, 5);
  REQUIRE(r.has_value());
  CHECK(r->op == 0);
  CHECK_FALSE(r->satisfied);
}

TEST_CASE("selection rule: no measurable candidates -> no result") {
  std::vector<CandidateSlack> cands = {{0, 10, false}};
  CHECK_FALSE(select_lookahead(cands, 20, 5).has_value());
  CHECK_FALSE(select_lookahead({}, 20, 5).has_value());
}

TEST_CASE("negative slack is recorded as-is and rejected by the rule") {
  std::vector<CandidateSlack> cands = {{0, -5, true}, {1, 30, true}};
  auto r = select_lookahead(cands, 20, 5);
  REQUIRE(r.has_value());
  CHECK(r->op == 1);
}

TEST_CASE("marker rounds complete when data and all candidate copies arrive") {
  MarkerRounds rounds(/*expected_data_copies=*/2);
  std::map<int, std::size_t> expected{{0, 1}, {1, 1}};
  rounds.on_hint_copy(7, 0, from_ms(100));
  rounds.on_hint_copy(7, 1, from_ms(110));
  rounds.on_data_copy(7, from_ms(140));
  CHECK_FALSE(rounds.try_complete(7, expected).has_value());  // one data copy missing
  rounds.on_data_copy(7, from_ms(150));
  auto done = rounds.try_complete(7, expected);
  REQUIRE(done.has_value());
  REQUIRE(done->slack_per_candidate.size() == 2);
  CHECK(done->slack_per_candidate[0] == std::pair<int, Nanos>(0, from_ms(50)));
  CHECK(done->slack_per_candidate[1] == std::pair<int, Nanos>(1, from_ms(40)));
  CHECK(rounds.pending() == 0);
}

TEST_CASE("pathological order: data before hint gives negative G, recorded as-is") {
  MarkerRounds rounds(1);
  std::map<int, std::size_t> expected{{0, 1}};
  rounds.on_data_copy(3, from_ms(100));
  rounds.on_hint_copy(3, 0, from_ms(130));
  auto done = rounds.try_complete(3, expected);
  REQUIRE(done.has_value());
  CHECK(done->slack_per_candidate[0].second == from_ms(-30));
}

TEST_CASE("stale rounds are discarded past the horizon") {
  MarkerRounds rounds(1, /*horizon=*/4);
  rounds.on_data_copy(1, from_ms(1));
  rounds.on_data_copy(2, from_ms(2));
  CHECK(rounds.discard_stale(10) == 2);
  CHECK(rounds.pending() == 0);
}

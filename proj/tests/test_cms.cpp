#include <map>
#include <string>

#include "doctest.h"
#include "kps/cms.hpp"
#include "kps/rng.hpp"

using namespace kps;

namespace {
CmsSketch::Params params(std::uint32_t d, std::uint32_t w, std::uint32_t b, std::uint32_t T,
                         std::uint64_t delta = 1'000'000) {
  CmsSketch::Params p;
  p.depth = d;
  p.width = w;
  p.bits = b;
  p.hot_threshold = T;
  p.aging_interval = delta;
  return p;
}
}  // namespace

TEST_CASE("updates increment every touched counter; min estimate tracks count") {
  CmsSketch cms(params(4, 1024, 8, 20));
  for (int i = 0; i < 5; ++i) cms.update("k");
  CHECK(cms.estimate("k") >= 5);  // equality when no collision
}

TEST_CASE("counters saturate at 2^b - 1") {
  CmsSketch cms(params(4, 64, 2, 20));
  for (int i = 0; i < 10; ++i) cms.update("k");
  CHECK(cms.estimate("k") == 3);
  CHECK(cms.max_counter() <= 3);
}

TEST_CASE("estimates never underestimate") {
  CmsSketch cms(params(4, 10000, 8, 20));
  for (int i = 0; i < 1000; ++i) cms.update("key" + std::to_string(i));
  for (int i = 0; i < 1000; ++i) CHECK(cms.estimate("key" + std::to_string(i)) >= 1);
}

TEST_CASE("aging halves every counter by integer shift") {
  CmsSketch cms(params(1, 8, 8, 20));
  // 7 >> 1 == 3, 1 >> 1 == 0, 0 stays 0
  for (int i = 0; i < 7; ++i) cms.update("a");
  cms.update("b");
  std::uint32_t ea = cms.estimate("a");
  std::uint32_t eb = cms.estimate("b");
  cms.age();
  CHECK(cms.estimate("a") == ea >> 1);
  CHECK(cms.estimate("b") == eb >> 1);
  cms.age();
  cms.age();
  CHECK(cms.estimate("a") == ((ea >> 1) >> 1) >> 1);
}

TEST_CASE("aging an all-zero sketch is a no-op") {
  CmsSketch cms(params(4, 128, 8, 20));
  cms.age();
  CHECK(cms.max_counter() == 0);
}

TEST_CASE("hot classification follows the min-row threshold") {
  CmsSketch cms(params(4, 4096, 8, 20));
  CHECK_FALSE(cms.is_hot("fresh"));
  for (int i = 0; i < 25; ++i) cms.update("k");
  CHECK(cms.is_hot("k"));  // all touched counters = 25 >= 20
  cms.age();               // 25 >> 1 = 12 < 20
  CHECK_FALSE(cms.is_hot("k"));
}

TEST_CASE("aging runs automatically every delta records") {
  CmsSketch cms(params(2, 256, 8, 100, 10));
  for (int i = 0; i < 9; ++i) cms.update("k");
  CHECK(cms.estimate("k") == 9);
  cms.update("k");  // 10th record triggers the aging pass: 10 >> 1
  CHECK(cms.estimate("k") == 5);
  CHECK(cms.records_since_age() == 0);
}

TEST_CASE("memory footprint is exactly d*w counters at counter width") {
  CmsSketch cms(params(4, 10000, 8, 20));
  CHECK(cms.storage_bytes() == 40000);  // 40 KB per lookahead subtask
  CmsSketch wide(params(4, 10000, 16, 20));
  CHECK(wide.storage_bytes() == 80000);
}

TEST_CASE("no underestimation before saturation (b=16, random streams)") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    CmsSketch cms(params(4, 512, 16, 1000));
    std::map<std::string, std::uint32_t> truth;
    int n = 20 + static_cast<int>(rng.below(200));
    for (int i = 0; i < n; ++i) {
      std::string k = "k" + std::to_string(rng.below(50));
      cms.update(k);
      ++truth[k];
    }
    for (const auto& [k, c] : truth) CHECK(cms.estimate(k) >= c);
  }
}

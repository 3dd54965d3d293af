#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

#include "kps/hash.hpp"

namespace kps {

// Count-Min Sketch with b-bit saturating counters and periodic aging.
// Classifies very frequent keys as hot so the hint extractor can skip them:
// hot keys sit in the stateful operator's cache anyway.
class CmsSketch {
 public:
  struct Params {
    std::uint32_t depth = 4;       // d rows
    std::uint32_t width = 10000;   // w cells per row
    std::uint32_t bits = 8;        // b-bit counters, saturate at 2^b - 1
    std::uint32_t hot_threshold = 20;
    std::uint64_t aging_interval = 1000;  // records between aging passes
    std::uint64_t seed = 1;
  };

  explicit CmsSketch(Params p)
      : p_(p),
        cap_((p.bits >= 32) ? 0xFFFFFFFFu : ((1u << p.bits) - 1)),
        cell_bytes_(p.bits <= 8 ? 1 : (p.bits <= 16 ? 2 : 4)),
        cells_(static_cast<std::size_t>(p.depth) * p.width * cell_bytes_, 0) {
    seeds_.reserve(p.depth);
    std::uint64_t s = p.seed;
    for (std::uint32_t i = 0; i < p.depth; ++i) {
      s = mix64(s + 0x9E3779B97F4A7C15ull);
      seeds_.push_back(s);
    }
  }

  void update(std::string_view key) {
    for (std::uint32_t row = 0; row < p_.depth; ++row) {
      std::size_t idx = cell_index(row, key);
      std::uint32_t c = read_cell(idx);
      if (c < cap_) write_cell(idx, c + 1);
    }
    if (++records_since_age_ >= p_.aging_interval) {
      age();
      records_since_age_ = 0;
    }
  }

  // Min-row estimate; never underestimates the true count while no touched
  // counter has saturated or been aged.
  std::uint32_t estimate(std::string_view key) const {
    std::uint32_t m = cap_;
    for (std::uint32_t row = 0; row < p_.depth; ++row)
      m = std::min(m, read_cell(cell_index(row, key)));
    return m;
  }

  // Hot iff all d touched counters reach the threshold.
  bool is_hot(std::string_view key) const { return estimate(key) >= p_.hot_threshold; }

  // Halves every counter (integer right shift), keeping estimates fresh.
  void age() {
    const std::size_t n = static_cast<std::size_t>(p_.depth) * p_.width;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t c = read_cell(i);
      if (c) write_cell(i, c >> 1);
    }
  }

  std::uint32_t max_counter() const {
    std::uint32_t m = 0;
    const std::size_t n = static_cast<std::size_t>(p_.depth) * p_.width;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, read_cell(i));
    return m;
  }

  std::size_t storage_bytes() const { return cells_.size(); }
  std::uint64_t records_since_age() const { return records_since_age_; }
  const Params& params() const { return p_; }

 private:
  std::size_t cell_index(std::uint32_t row, std::string_view key) const {
    return static_cast<std::size_t>(row) * p_.width + keyed_hash(key, seeds_[row]) % p_.width;
  }

  std::uint32_t read_cell(std::size_t idx) const {
    const unsigned char* p = cells_.data() + idx * cell_bytes_;
    switch (cell_bytes_) {
      case 1:
        return *p;
      case 2: {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        return v;
      }
      default: {
        std::uint32_t v;
        std::memcpy(&v, p, 4);
        return v;
      }
    }
  }

  void write_cell(std::size_t idx, std::uint32_t v) {
    unsigned char* p = cells_.data() + idx * cell_bytes_;
    switch (cell_bytes_) {
      case 1:
        *p = static_cast<unsigned char>(v);
        break;
      case 2: {
        std::uint16_t w = static_cast<std::uint16_t>(v);
        std::memcpy(p, &w, 2);
        break;
      }
      default:
        std::memcpy(p, &v, 4);
    }
  }

  Params p_;
  std::uint32_t cap_;
  std::uint32_t cell_bytes_;
  std::vector<unsigned char> cells_;
  std::vector<std::uint64_t> seeds_;
  std::uint64_t records_since_age_ = 0;
};

}  // namespace kps

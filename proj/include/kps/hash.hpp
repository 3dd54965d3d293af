#pragma once

#include <cstdint>
#include <string_view>

namespace kps {

// FNV-1a over bytes, seed folded into the offset basis. Stable across
// platforms and builds (frozen test fixtures depend on it).
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9E3779B97F4A7C15ull);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t keyed_hash(std::string_view bytes, std::uint64_t seed) {
  return mix64(fnv1a64(bytes, seed));
}

// Partition routing. Deterministic, and shared by data and hint channels so a
// key's hints land on the same subtask as its tuples.
inline std::uint32_t route(std::string_view key, std::uint32_t parallelism) {
  if (parallelism <= 1) return 0;
  return static_cast<std::uint32_t>(keyed_hash(key, 0) % parallelism);
}

}  // namespace kps

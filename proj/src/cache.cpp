#include "kps/cache.hpp"

#include "kps/clock_cache.hpp"
#include "kps/lru.hpp"

namespace kps {

std::unique_ptr<StateCache> make_cache(CachePolicy policy, std::size_t capacity,
                                       std::size_t eviction_buffer_capacity) {
  switch (policy) {
    case CachePolicy::Lru:
      return std::make_unique<LruCache>(capacity, eviction_buffer_capacity);
    case CachePolicy::Clock:
      return std::make_unique<ClockCache>(capacity, eviction_buffer_capacity);
    case CachePolicy::Tac:
    default: {
      TacOptions opt;
      opt.capacity = capacity;
      opt.eviction_buffer_capacity = eviction_buffer_capacity;
      return std::make_unique<TacCache>(opt);
    }
  }
}

}  // namespace kps

#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace roomsense {

// splitmix64 step; used to derive independent sub-seeds from a master seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t tag) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). Each index must be independent of the others;
// results keyed by index stay deterministic regardless of scheduling.
// Exceptions from workers are rethrown on the calling thread (first by index).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

} // namespace roomsense

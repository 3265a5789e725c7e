#pragma once

// Seed derivation and replicate-parallel execution.
//
// Every randomized routine takes a root seed and derives one independent
// engine per work item (replicate, simulated dataset, candidate block size)
// from (seed, index) alone. Results are stored by index, so the output does
// not depend on the number of worker threads or on scheduling order.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace gsc {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of child stream `index` under `seed`. Chains compose:
/// child_seed(child_seed(s, a), b) names a grandchild stream.
inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

inline Engine child_engine(std::uint64_t seed, std::uint64_t index) {
    return make_engine(child_seed(seed, index));
}

/// Uniform integer on the closed range [lo, hi].
template <typename Int>
Int uniform_int(Engine& rng, Int lo, Int hi) {
    return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

inline double uniform01(Engine& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Fresh seed for runs where the caller did not pick one. Always recorded
/// in the output by the callers.
inline std::uint64_t generate_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

/// Worker count: GSC_THREADS if set and positive, else hardware concurrency.
inline unsigned default_threads() {
    if (const char* env = std::getenv("GSC_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Work items are
/// handed out dynamically; fn must only write to storage owned by index i.
/// The first exception thrown by any item is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace gsc

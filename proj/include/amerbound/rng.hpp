#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace amerbound {

// SplitMix64 stream keyed by (seed, stream index): each path owns an
// independent generator, so results do not depend on evaluation order.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(seed + 0x9e3779b97f4a7c15ULL * (mix(stream) + 1))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// Worker count from AMERBOUND_THREADS (default 1).
inline unsigned thread_count() {
    if (const char* env = std::getenv("AMERBOUND_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    return 1;
}

// Runs body(chunk) for chunk in [0, chunks) on up to thread_count() workers.
// Callers keep per-chunk results and reduce them in chunk order.
inline void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body) {
    unsigned workers = std::min<std::size_t>(thread_count(), chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += workers) body(c);
        });
    for (auto& t : pool) t.join();
}

}  // namespace amerbound

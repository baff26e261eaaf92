#include "mimic/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mimic {

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    workers = resolve_workers(workers);
    constexpr std::size_t kChunk = kParallelChunk;
    if (workers == 1 || count <= kChunk) {
        fn(0, count);
        return;
    }
    const std::size_t chunks = (count + kChunk - 1) / kChunk;
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) {
                return;
            }
            const std::size_t begin = c * kChunk;
            fn(begin, std::min(begin + kChunk, count));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned i = 0; i + 1 < workers; ++i) {
        pool.emplace_back(body);
    }
    body();
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace mimic

#pragma once

#include <cstddef>
#include <functional>

namespace mimic {

inline constexpr std::size_t kParallelChunk = 4096;

/// Runs fn(begin, end) over [0, count) split into kParallelChunk-sized chunks
/// handed to `workers` threads. Chunk boundaries do not depend on the worker
/// count, so any per-chunk output is identical whatever the parallelism.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

unsigned resolve_workers(unsigned requested);

}  // namespace mimic

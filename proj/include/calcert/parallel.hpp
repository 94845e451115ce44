#pragma once

#include <cstddef>
#include <functional>

namespace calcert {

// Runs fn(i) for i in [0, n) on up to `threads` worker threads (0 = hardware
// concurrency). Work is split into contiguous index blocks; callers write
// results into preallocated per-index slots and reduce sequentially afterwards,
// so the outcome is independent of the thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

int effective_threads(int requested);

}  // namespace calcert

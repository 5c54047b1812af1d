#pragma once

#include <cstddef>
#include <functional>

namespace rollidx {

// Number of worker threads for parallel loops.  Reads ROLLIDX_THREADS once
// (falling back to hardware concurrency).  Results never depend on this
// value: parallel_for only ever writes disjoint, statically assigned ranges.
unsigned worker_threads();

// Process-wide override of the thread count (0 restores the environment
// default).  Lets one process compare runs at different thread counts.
void set_worker_threads(unsigned n);

// Runs fn(begin, end) over a static partition of [0, n).  Chunk boundaries
// depend only on n and the thread count; each chunk touches its own slice of
// any output array, so numerical results are identical for any thread count
// (reductions are done afterwards with pairwise_sum over stored per-element
// values, never with per-thread accumulators).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace rollidx

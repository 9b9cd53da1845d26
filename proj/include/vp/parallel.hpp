#pragma once
// Small thread pool for loops over independent grid slices.
//
// Determinism contract: parallel_for(n, fn) may call fn(i) from any worker in
// any order, so fn must touch only data owned by index i. Reductions that
// need a fixed combination order should write per-index partials and combine
// serially afterwards. Under that contract results are byte-identical for
// every worker count, including 1.

#include <cstddef>
#include <functional>

namespace vp::par {

// Worker cap: min(hardware_concurrency, VP_THREADS if set). At least 1.
int worker_limit();

// Override the cap (0 restores the environment-based default).
void set_worker_limit(int n);

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Range flavor: fn(begin, end) per chunk, cheaper when fn has setup cost.
void parallel_for_ranges(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace vp::par

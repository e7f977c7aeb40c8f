#pragma once

#include <cstdint>
#include <functional>

namespace sewlab {

// Number of workers used by parallel_for when the caller passes 0.
// Settable from the CLI (--workers); defaults to the hardware count.
int default_workers();
void set_default_workers(int workers);

// Runs fn(begin, end) over a static partition of [0, n) on `workers` threads.
// Workers write to disjoint per-index slots; all reductions happen afterwards
// with a fixed pairwise order, so results do not depend on the worker count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn,
                  int workers = 0);

} // namespace sewlab

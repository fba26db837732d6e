#pragma once

#include <cstddef>
#include <functional>

namespace friedrichs {

/// Worker cap: FRIEDRICHS_LAB_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; results
/// must be written to per-index slots so output order is schedule independent.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned max_workers = 0);

}  // namespace friedrichs

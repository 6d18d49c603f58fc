#pragma once

#include <cstddef>
#include <functional>

namespace far {

/// Worker count: FAR_THREADS if set to a positive integer, otherwise the
/// machine's hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, count) across worker_count() threads. Each index
/// runs exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace far

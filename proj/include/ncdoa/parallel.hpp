#pragma once

#include <cstddef>
#include <functional>

namespace ncdoa {

/// Worker count from NCDOA_WORKERS, else the hardware concurrency (at least 1).
unsigned default_worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out dynamically; the first exception thrown is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

} // namespace ncdoa

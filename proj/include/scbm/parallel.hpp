#pragma once

#include <cstddef>
#include <functional>

namespace scbm {

/// Worker cap: SCBM_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_budget();

/// Runs body(i) for i in [0, count). Work is handed out dynamically; callers
/// write results into slot i.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace scbm

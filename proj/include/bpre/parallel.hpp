#pragma once

#include <cstddef>
#include <functional>

namespace bpre {

// Worker count: `requested` if nonzero, else BPRE_THREADS if set, else the
// hardware concurrency. Never affects computed values.
unsigned worker_count(unsigned requested = 0);

/// Runs body(i) for i in [0, count). Work is handed out in contiguous blocks;
/// callers write results into slot i, so output never depends on scheduling.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace bpre

#pragma once

#include <cstddef>
#include <functional>

namespace gossiprec {

/// Worker count: `requested` if positive, else hardware concurrency; always
/// capped by the GOSSIPREC_THREADS environment variable when it is set.
unsigned resolve_threads(unsigned requested = 0);

/// Calls fn(i) for i in [0, n) across `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// outcome does not depend on the schedule.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace gossiprec

#pragma once

#include <cstdint>
#include <functional>

namespace nfl {

// Worker count used by parallel_for: NFL_THREADS if set and positive,
// otherwise the hardware concurrency (at least 1).
int max_workers();

// Runs fn(begin, end) over a partition of [0, n) using up to `threads`
// workers (0 = max_workers()). Chunks are contiguous and the partition is
// a pure function of (n, worker count), so callers that write results
// per index get identical output no matter how many threads run.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn,
                  int threads = 0);

}  // namespace nfl

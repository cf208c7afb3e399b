#pragma once

#include <cstddef>
#include <functional>

namespace cgc {

// Runs fn(i) for i in [0, n). With jobs > 1 the index range is split into
// contiguous chunks across threads; callers must write results into
// per-index slots so the outcome is independent of the thread count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace cgc

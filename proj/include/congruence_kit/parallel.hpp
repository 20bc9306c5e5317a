#pragma once

#include <cstddef>
#include <functional>

namespace ck {

// Worker count: CONGRUENCE_KIT_THREADS if set (>= 1), else the hardware count.
int thread_count();

// Runs body(i) for i in [0, n). Each index is handled exactly once; callers
// write into per-index slots so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ck

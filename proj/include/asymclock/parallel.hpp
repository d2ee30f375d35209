#pragma once

#include <cstddef>
#include <functional>

namespace asymclock {

// Runs fn(i) for i in [0, n) across up to `workers` threads (0 means one per
// hardware thread). Output must depend only on i, never on scheduling; then
// any worker count yields identical results.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace asymclock

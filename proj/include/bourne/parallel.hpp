#pragma once

#include <cstddef>
#include <functional>

namespace bourne {

// Runs fn(i) for i in [0, count) on up to `threads` workers in contiguous
// chunks. threads <= 1 runs inline. The first exception thrown by any task
// is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace bourne

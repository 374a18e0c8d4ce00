#pragma once

#include <cstddef>
#include <functional>

namespace pmif {

/// Runs fn(0..count-1) on up to `workers` threads. Indices are claimed from a
/// shared counter; the first exception thrown by any worker is rethrown after
/// all threads join. workers <= 1 runs inline.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace pmif

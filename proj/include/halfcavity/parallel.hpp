#pragma once

#include <cstddef>
#include <functional>

namespace halfcavity {

/// Worker count used by grid evaluations (default 1).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(i) for i in [0, n), split into contiguous blocks across
/// thread_count() workers. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace halfcavity

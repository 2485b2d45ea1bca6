#pragma once

#include <cstddef>
#include <functional>

namespace upk {

// Worker count from UPK_THREADS; 0 or unset means hardware concurrency.
std::size_t thread_count();

// Runs fn(i) for i in [0, n). Each index runs exactly once; the call returns
// after all of them finish. The first exception thrown (lowest index) is
// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace upk

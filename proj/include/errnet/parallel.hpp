#ifndef ERRNET_PARALLEL_HPP_
#define ERRNET_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace errnet {

/// Worker cap from ERRNET_THREADS, else hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Callers
/// write results into slot i, so output order never depends on scheduling.
/// The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace errnet

#endif  // ERRNET_PARALLEL_HPP_

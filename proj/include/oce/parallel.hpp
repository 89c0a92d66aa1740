#ifndef OCE_PARALLEL_HPP
#define OCE_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace oce {

/// Worker count: OCE_THREADS when set (minimum 1), otherwise the hardware
/// concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). Tasks must write only to their own output
/// slot and depend only on i, so results are byte-identical for any worker
/// count; indices are pulled from a shared counter.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

} // namespace oce

#endif

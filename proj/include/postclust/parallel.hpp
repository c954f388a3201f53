#ifndef POSTCLUST_PARALLEL_HPP
#define POSTCLUST_PARALLEL_HPP

#include <functional>

namespace postclust {

// Worker count from POSTCLUST_WORKERS, else hardware concurrency.
int worker_count();

// Runs fn(0..n-1) on a shared-counter worker pool. Callers own determinism:
// results must be written to caller-indexed slots. The first exception is
// rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace postclust

#endif

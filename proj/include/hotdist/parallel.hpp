#ifndef HOTDIST_PARALLEL_HPP
#define HOTDIST_PARALLEL_HPP

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hotdist {

/// Worker cap: HOTDIST_THREADS when set to a positive integer, else
/// hardware concurrency. Read on every call so tests can vary it.
int worker_count();

/// Runs task(i) for i in [0, n). Tasks must write to disjoint state; the
/// split is deterministic and results may not depend on the worker count.
void parallel_for_index(std::int64_t n, const std::function<void(std::int64_t)>& task);

}  // namespace hotdist

#endif

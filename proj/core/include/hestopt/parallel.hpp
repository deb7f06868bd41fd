#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace hestopt {

// Runs fn(i) for i in [0, n) split over `threads` workers. Each index must
// write only its own outputs; results are then independent of the worker
// count and of scheduling.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

// Deterministic pairwise summation (fixed association order).
double pairwise_sum(std::span<const double> xs);

} // namespace hestopt

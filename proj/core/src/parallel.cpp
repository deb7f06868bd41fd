#include "hestopt/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace hestopt {

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    const int workers = std::max(1, threads);
    if (workers == 1 || n < 2 * workers) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

namespace {

double pairwise_sum_impl(const double* xs, std::size_t n) {
    if (n <= 128) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += xs[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(xs, half) + pairwise_sum_impl(xs + half, n - half);
}

} // namespace

double pairwise_sum(std::span<const double> xs) {
    return pairwise_sum_impl(xs.data(), xs.size());
}

} // namespace hestopt

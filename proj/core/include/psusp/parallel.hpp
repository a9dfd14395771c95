#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace psusp {

/// Worker count for trial loops; 0 means one worker per hardware thread.
struct Parallelism {
    unsigned workers = 0;

    unsigned resolved() const noexcept {
        if (workers != 0) return workers;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }
};

/// Runs body(i) for i in [0, n) over contiguous blocks. Callers write results
/// into slot i so the reduction order never depends on the worker count.
template <class Body>
void parallel_for(std::size_t n, Parallelism par, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(par.resolved(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * block;
                const std::size_t hi = std::min(n, lo + block);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace psusp

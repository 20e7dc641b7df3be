#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace fsoam {

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Calls f(i) for i in [0, n) across `workers` threads (0 = hardware
/// concurrency). Callers write results into slot i, so output order is fixed
/// by index regardless of scheduling. The first exception thrown is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
    const std::size_t count = std::min<std::size_t>(resolve_workers(workers), n);
    if (count <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> threads;
    threads.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += count) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace fsoam

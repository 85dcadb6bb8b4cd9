// parallel.hpp — index-keyed worker pool; results never depend on the schedule
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace darkloc::parallel {

// --workers value if given, else DARKLOC_WORKERS, else hardware concurrency (>= 1).
std::size_t resolve_workers(std::optional<std::size_t> requested = std::nullopt);

// Calls fn(i) for i in [0, n). Each index writes only its own slot, so any
// schedule gives the same result. The exception of the lowest failing index wins.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    std::size_t err_index = n;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
        body();
    }
    if (err) std::rethrow_exception(err);
}

} // namespace darkloc::parallel

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qfiw {

// Thread budget: QFIW_THREADS caps parallelism, default hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("QFIW_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [0, n). Each index writes only its own slot, so the
// result is independent of scheduling order. The first exception from any
// worker is rethrown on the calling thread.
inline void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned budget = std::min<std::size_t>(thread_budget(), n);
    if (budget <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(budget);
    for (unsigned t = 0; t < budget; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += budget) fn(i);
            } catch (...) {
                const std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace qfiw

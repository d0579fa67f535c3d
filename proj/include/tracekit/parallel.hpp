#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tracekit {

/// Runs fn(index, worker_id) for index in [0, count) on a small worker pool.
/// Indices are handed out atomically; the first exception is rethrown on the
/// calling thread after all workers finish.
inline void parallel_for(int64_t count, int threads,
                         const std::function<void(int64_t, int)>& fn) {
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<int64_t>(threads, std::max<int64_t>(1, count)));

    if (threads == 1) {
        for (int64_t i = 0; i < count; ++i) fn(i, 0);
        return;
    }

    std::atomic<int64_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int64_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) break;
                try {
                    fn(i, w);
                } catch (...) {
                    bool expected = false;
                    if (failed.compare_exchange_strong(expected, true))
                        first_error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tracekit

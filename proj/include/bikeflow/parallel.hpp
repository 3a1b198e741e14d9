#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bikeflow::detail {

// Calls fn(task_index, worker_index) for every task in [0, count) using up to
// `threads` workers pulling tasks from a shared counter. The first exception
// thrown by any task is rethrown on the caller's thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    threads = unsigned(std::min<std::size_t>(std::max(threads, 1u), count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i, 0u);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                    try {
                        fn(i, w);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

// Splits [0, count) into contiguous chunks, one parallel task each.
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
    threads = std::max(threads, 1u);
    const std::size_t chunks = std::min<std::size_t>(count, std::size_t(threads) * 4);
    if (chunks == 0) return;
    parallel_for(chunks, threads, [&](std::size_t c, unsigned w) {
        const std::size_t begin = count * c / chunks;
        const std::size_t end = count * (c + 1) / chunks;
        fn(begin, end, w);
    });
}

}  // namespace bikeflow::detail

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lobswitch {

/// Runs fn(begin, end) over [0, n) split into `threads` contiguous chunks.
/// Chunk boundaries depend only on n and threads. The first exception
/// thrown by a worker is rethrown after all workers have joined.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, threads);
    if (threads == 1 || n < 2) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lobswitch

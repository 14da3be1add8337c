// parallel.hpp: order-preserving parallel map over independent grid points

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dynmod {

// Evaluates fn(i) for i in [0, count) on a small thread pool and returns the
// results in index order. The first exception thrown (lowest index) is
// rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t count, Fn&& fn, unsigned max_threads = 0) {
    using Result = decltype(fn(std::size_t{0}));
    std::vector<Result> out(count);
    unsigned workers = max_threads == 0 ? std::thread::hardware_concurrency() : max_threads;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = count;

    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace dynmod

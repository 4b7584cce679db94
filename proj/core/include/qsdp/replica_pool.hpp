#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qsdp {

// Runs fn(0) ... fn(count-1) on up to `workers` threads and returns the
// results ordered by index.  Scheduling never leaks into the output: each
// index owns its slot, and callers hand each index its own RNG stream, so
// the worker count is free to vary without changing a single byte of
// results.
template <typename T, typename Fn>
std::vector<T> run_indexed(long count, int workers, Fn&& fn) {
    std::vector<T> out(static_cast<std::size_t>(count));
    if (workers <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawned = workers < count ? workers : static_cast<int>(count);
    pool.reserve(static_cast<std::size_t>(spawned));
    for (int w = 0; w < spawned; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace qsdp

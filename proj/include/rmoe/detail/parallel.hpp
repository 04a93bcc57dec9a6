#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rmoe::detail {

// Runs body(0..n_items-1) on a bounded pool. The first exception is
// rethrown on the calling thread after all workers join.
inline void parallel_for(int n_items, int n_workers, const std::function<void(int)>& body) {
    if (n_items <= 0) return;
    if (n_workers <= 0) n_workers = static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers <= 0) n_workers = 1;
    n_workers = std::min(n_workers, n_items);
    if (n_workers == 1) {
        for (int i = 0; i < n_items; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_items) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace rmoe::detail

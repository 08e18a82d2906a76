#include "ftdf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ftdf {

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(resolve_threads(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::size_t failed_index = n;
    std::exception_ptr failure;

    const auto run = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();  // joins
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ftdf

#include "robustde/threads.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace robustde {

int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
    if (threads == 0) {
        threads = hardware_threads();
    }
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back(run);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace robustde

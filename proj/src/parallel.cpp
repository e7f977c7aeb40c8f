#include "sewlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace sewlab {

namespace {
std::atomic<int> g_workers{0};
}

int default_workers() {
    int w = g_workers.load(std::memory_order_relaxed);
    if (w <= 0) {
        w = static_cast<int>(std::thread::hardware_concurrency());
        if (w <= 0) w = 1;
    }
    return w;
}

void set_default_workers(int workers) { g_workers.store(workers, std::memory_order_relaxed); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn,
                  int workers) {
    if (n <= 0) return;
    if (workers <= 0) workers = default_workers();
    workers = static_cast<int>(std::min<std::int64_t>(workers, n));
    if (workers <= 1) {
        fn(0, n);
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min<std::int64_t>(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace sewlab

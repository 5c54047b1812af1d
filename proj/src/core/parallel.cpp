#include "rollidx/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace rollidx {

namespace {
std::atomic<unsigned> thread_override{0};
}

unsigned worker_threads() {
    const unsigned forced = thread_override.load(std::memory_order_relaxed);
    if (forced != 0) return forced;
    static const unsigned cached = [] {
        if (const char* env = std::getenv("ROLLIDX_THREADS")) {
            const long parsed = std::strtol(env, nullptr, 10);
            if (parsed >= 1 && parsed <= 256) return static_cast<unsigned>(parsed);
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }();
    return cached;
}

void set_worker_threads(unsigned n) {
    thread_override.store(std::min(n, 256u), std::memory_order_relaxed);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(worker_threads(), n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : threads) t.join();
}

} // namespace rollidx

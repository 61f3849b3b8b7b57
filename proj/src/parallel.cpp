#include "sgval/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sgval {

namespace {
std::atomic<std::size_t> g_threads{0};
}

void set_thread_count(std::size_t threads) { g_threads.store(threads); }

std::size_t thread_count() {
    const std::size_t t = g_threads.load();
    if (t != 0) return t;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
    if (count == 0) return;
    min_chunk = std::max<std::size_t>(1, min_chunk);
    const std::size_t workers = std::min(thread_count(), (count + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        body(0, count);
        return;
    }

    const std::size_t chunk = (count + workers - 1) / workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);

    auto run = [&](std::size_t begin, std::size_t end) {
        try {
            body(begin, end);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= count) break;
        pool.emplace_back(run, begin, std::min(count, begin + chunk));
    }
    run(0, std::min(count, chunk));
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace sgval

#include "bsde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bsde {

unsigned resolve_threads(unsigned threads) {
    if (threads != 0) return threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::size_t block_count_for(std::size_t count) {
    return std::min<std::size_t>(count, 64);
}

namespace {

void run_workers(std::size_t n_tasks, unsigned threads,
                 const std::function<void(std::size_t)>& task) {
    if (n_tasks == 0) return;
    unsigned n_workers = std::min<std::size_t>(resolve_threads(threads), n_tasks);
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

void for_each_block(std::size_t count, unsigned threads,
                    const std::function<void(std::size_t, BlockRange)>& fn) {
    if (count == 0) return;
    std::size_t n_blocks = block_count_for(count);
    run_workers(n_blocks, threads, [&](std::size_t b) {
        BlockRange r{count * b / n_blocks, count * (b + 1) / n_blocks};
        fn(b, r);
    });
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
    for_each_block(count, threads, [&](std::size_t, BlockRange r) {
        for (std::size_t i = r.begin; i < r.end; ++i) fn(i);
    });
}

} // namespace bsde

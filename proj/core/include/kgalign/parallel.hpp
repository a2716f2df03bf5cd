// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgalign contributors
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kgalign {

// Number of worker threads to use; honors KGALIGN_THREADS when set.
inline unsigned worker_count() {
    if (const char* env = std::getenv("KGALIGN_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [begin, end). Each index is processed exactly once and
// workers write to disjoint state, so results do not depend on thread count.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t)>& fn) {
    const std::size_t total = end > begin ? end - begin : 0;
    unsigned workers = worker_count();
    if (workers <= 1 || total < 2) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    workers = std::min<std::size_t>(workers, total);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

// Runs fn(lo, hi) over fixed-size spans of [begin, end). Span boundaries do
// not depend on the worker count, so floating-point results computed per
// span are bit-identical no matter how many threads run.
inline void parallel_for_spans(std::size_t begin, std::size_t end, std::size_t span,
                               const std::function<void(std::size_t, std::size_t)>& fn,
                               unsigned max_workers = 0) {
    const std::size_t total = end > begin ? end - begin : 0;
    if (total == 0) return;
    if (span == 0) span = 1;
    const std::size_t tasks = (total + span - 1) / span;
    unsigned workers = std::min<std::size_t>(worker_count(), tasks);
    if (max_workers > 0) workers = std::min(workers, max_workers);
    if (workers <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) {
            const std::size_t lo = begin + t * span;
            fn(lo, std::min(end, lo + span));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            try {
                while (true) {
                    const std::size_t t = next.fetch_add(1);
                    if (t >= tasks) break;
                    const std::size_t lo = begin + t * span;
                    fn(lo, std::min(end, lo + span));
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace kgalign

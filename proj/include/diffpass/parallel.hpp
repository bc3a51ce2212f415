#pragma once

// Tiny parallel-for helper. Worker count is capped by the DIFFPASS_THREADS
// environment variable (0 or unset = hardware concurrency). Work is split
// into contiguous chunks by index so results land in preallocated slots and
// reductions stay deterministic regardless of scheduling.

#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace diffpass {

inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("DIFFPASS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v) < hw ? static_cast<unsigned>(v) : hw;
    }
    return hw;
}

// Runs fn(i) for i in [0, count). The callable must be safe to run from
// several threads at once (everything in this library is pure, so storing
// to result[i] is the only write). Exceptions are captured and the first
// one rethrown after all workers join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned n_threads = static_cast<unsigned>(
        count < static_cast<std::size_t>(workers) ? count : workers);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    const std::size_t chunk = (count + n_threads - 1) / n_threads;
    for (unsigned w = 0; w < n_threads; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&fn, &errors, w, lo, hi]() {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace diffpass

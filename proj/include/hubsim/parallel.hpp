#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

namespace hubsim {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Replicate-parallel map with results keyed by replicate index.  Each call of
// fn(i) must derive its own random stream from i, so the output is identical
// for every thread count.
template <class R, class Fn>
std::vector<R> parallel_map(std::int64_t count, int threads, Fn&& fn) {
    std::vector<R> out(static_cast<std::size_t>(count));
    int t = resolve_threads(threads);
    if (t <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) out[std::size_t(i)] = fn(i);
        return out;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            std::int64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[std::size_t(i)] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(t));
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace hubsim

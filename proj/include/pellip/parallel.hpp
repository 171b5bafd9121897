#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace pellip {

/// Worker count: --threads flag > PELLIP_THREADS env > hardware.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PELLIP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(batch_index) for batch_index in [0, n_batches). Batches carry
/// their own seeds, so the result of a run is a pure function of the batch
/// decomposition and never of the worker count.
inline void parallel_batches(int n_batches, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n_batches));
    if (threads == 1) {
        for (int k = 0; k < n_batches; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int k = next.fetch_add(1);
                if (k >= n_batches) return;
                body(k);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace pellip

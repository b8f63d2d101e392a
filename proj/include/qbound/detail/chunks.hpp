#ifndef QBOUND_DETAIL_CHUNKS_HPP
#define QBOUND_DETAIL_CHUNKS_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "qbound/rng.hpp"

namespace qbound::detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QBOUND_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Fixed chunk layout: depends only on n, never on the thread count, so
// chunked aggregates are bit-identical however many workers run them.
inline std::vector<std::size_t> chunk_sizes(std::size_t n) {
    std::size_t chunks = std::clamp<std::size_t>(n / 1000, 1, 1024);
    std::vector<std::size_t> sizes(chunks, n / chunks);
    for (std::size_t i = 0; i < n % chunks; ++i) ++sizes[i];
    return sizes;
}

// Runs work(acc, rng, count) once per chunk; chunk c draws from stream
// base+c.  Returns the per-chunk accumulators in chunk order; callers merge
// sequentially, which keeps the reduction deterministic.
template <class Acc, class Work>
std::vector<Acc> run_chunks(std::size_t n, RngStream base, int threads_requested,
                            Work work) {
    const std::vector<std::size_t> sizes = chunk_sizes(n);
    std::vector<Acc> accs(sizes.size());
    const int threads = std::min<int>(resolve_threads(threads_requested),
                                      static_cast<int>(sizes.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= sizes.size()) return;
            try {
                RngStream rng(base.seed(), base.stream() + idx);
                work(accs[idx], rng, sizes[idx]);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
    return accs;
}

}

#endif

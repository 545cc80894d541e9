#ifndef CLINKD_PARALLEL_HPP
#define CLINKD_PARALLEL_HPP

#include <exception>
#include <thread>
#include <vector>

namespace clinkd {

// Run fn(i) for i in [0, n) across at most `jobs` threads. Each worker owns a
// contiguous index range and writes only to its own slots, so results are
// identical for any job count; the first (lowest-range) exception wins.
template <typename Fn>
void parallel_for(size_t n, int jobs, Fn&& fn) {
    if (n == 0) return;
    size_t workers = jobs > 1 ? std::min<size_t>(static_cast<size_t>(jobs), n) : 1;
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    size_t chunk = (n + workers - 1) / workers;
    for (size_t t = 0; t < workers; ++t) {
        size_t begin = t * chunk;
        size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, t, begin, end] {
            try {
                for (size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace clinkd

#endif

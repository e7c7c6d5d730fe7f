#ifndef POLARIZE_PARALLEL_HPP
#define POLARIZE_PARALLEL_HPP

#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

namespace polarize {

/// Parallelism cap: POLARIZE_THREADS env var, else hardware concurrency.
inline int max_threads() {
    if (const char* env = std::getenv("POLARIZE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0,n) across independent tasks. Each task owns its
/// index slot, so results are deterministic regardless of thread count.
template <typename Fn>
void parallel_for_index(int n, Fn&& fn) {
    const int workers = std::min(n, max_threads());
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < n; i += workers) fn(i);
        }));
    }
    for (auto& f : futures) f.get();  // rethrows task exceptions
}

}  // namespace polarize

#endif

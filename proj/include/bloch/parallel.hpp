#ifndef BLOCH_PARALLEL_HPP
#define BLOCH_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bloch {

// Runs fn(i) for i in [0, n) on up to n_threads workers. Work is split into
// contiguous static chunks and results must be written by index, so output
// ordering never depends on scheduling.
template <typename Fn>
void parallel_for_index(std::size_t n, int n_threads, Fn&& fn) {
    if (n == 0) return;
    std::size_t workers = n_threads > 1 ? std::min<std::size_t>(static_cast<std::size_t>(n_threads), n) : 1;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace bloch

#endif

#include "roomsense/util.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>

namespace roomsense {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    int nthreads = resolve_threads(threads);
    if (nthreads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::map<std::size_t, std::exception_ptr> errors;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                errors.emplace(i, std::current_exception());
            }
        }
    };
    std::vector<std::thread> pool;
    std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(nthreads), n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (!errors.empty()) std::rethrow_exception(errors.begin()->second);
}

} // namespace roomsense

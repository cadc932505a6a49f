#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace gyrering {

// Worker count from GYRERING_THREADS, else hardware concurrency; at least 1.
int thread_count();

// Results are stored by index, so output order never depends on scheduling.
// The exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t count, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errors(count);
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
    auto run = [&](std::size_t first) {
        for (std::size_t i = first; i < count; i += workers) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        if (count > 0) run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace gyrering

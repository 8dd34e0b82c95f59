#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ksde {

// Static-partition parallel loop. Each index must be independent; results
// written into per-index slots stay deterministic regardless of scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned n_threads = 0) {
    if (n == 0) return;
    unsigned hw = n_threads ? n_threads : std::thread::hardware_concurrency();
    if (hw < 2 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (hw > n) hw = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(hw);
    for (unsigned t = 0; t < hw; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += hw) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ksde

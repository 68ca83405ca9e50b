// parallel.hpp: Ordered work pool for independent jobs
//
// Results come back in input order regardless of which worker ran what, so
// anything aggregated from them is reproducible.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace nmdecay {

/// requested > 0 wins; otherwise NMDECAY_THREADS, otherwise hardware concurrency.
int thread_count(int requested = 0);

template <class T, class F>
auto parallel_map(const std::vector<T>& items, F&& fn, int threads = 0)
    -> std::vector<std::invoke_result_t<F&, const T&>> {
    using R = std::invoke_result_t<F&, const T&>;
    const std::size_t n = items.size();
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(items[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count(threads)), n);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    std::vector<R> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

}  // namespace nmdecay

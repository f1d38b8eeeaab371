#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rabiq {

/// Calls fn(i) for every i in [0, count) on up to `jobs` threads.
/// If any call throws, the exception from the lowest failing index is
/// rethrown after all workers finish, so failures are reported the same way
/// regardless of scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (count == 0) {
        return;
    }
    const auto workers = static_cast<std::size_t>(std::max(1U, jobs));
    if (workers == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(std::min(workers, count));
        for (std::size_t w = 0; w < std::min(workers, count); ++w) {
            pool.emplace_back(work);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace rabiq

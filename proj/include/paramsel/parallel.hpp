// Copyright 2026 The paramsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace paramsel {

/// Resolves a user thread cap; 0 means one per hardware thread.
inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(task, worker) for task in [0, tasks) on up to `threads` workers.
/// Tasks are handed out in contiguous stripes, so each worker id sees a fixed
/// set of tasks; results must still be written to per-task slots by the caller
/// for the outcome to be independent of the thread count.
template <class Fn>
void parallel_for(std::size_t tasks, std::size_t threads, Fn&& fn) {
    const std::size_t workers = std::min(std::max<std::size_t>(1, threads), tasks);
    if (workers <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) {
            fn(t, std::size_t{0});
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::size_t lo = tasks * w / workers;
                const std::size_t hi = tasks * (w + 1) / workers;
                try {
                    for (std::size_t t = lo; t < hi; ++t) {
                        fn(t, w);
                    }
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace paramsel

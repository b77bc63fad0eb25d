#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mlbgg
{

/*!
 * Run body(i) for i in [0, n) on up to `workers` threads.
 *
 * Indices are split into contiguous blocks; callers write results into
 * slot i of a preallocated buffer, so the merged output never depends on
 * the worker count or completion order. The first exception is rethrown.
 */
template<class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body)
{
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            body(i);
        }
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t const block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
    {
        std::size_t const lo = w * block;
        std::size_t const hi = std::min(n, lo + block);
        if (lo >= hi)
        {
            break;
        }
        pool.emplace_back([&, lo, hi] {
            try
            {
                for (std::size_t i = lo; i < hi; ++i)
                {
                    body(i);
                }
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
    {
        t.join();
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

} // namespace mlbgg

#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace locpir {

// Static block partition of [0, count) over `workers` threads.
// fn(worker, begin, end) runs once per worker; worker 0 runs on the calling
// thread. The index->worker mapping depends only on (count, workers), so a
// fixed seed gives reproducible per-worker randomness streams.
template <class Fn>
void parallel_blocks(size_t count, unsigned workers, Fn&& fn)
{
    workers = std::max(1u, workers);
    workers = static_cast<unsigned>(std::min<size_t>(workers, std::max<size_t>(count, 1)));

    if (workers == 1) {
        fn(0u, size_t{0}, count);
        return;
    }

    const size_t chunk = (count + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);

    auto run = [&](unsigned w) {
        const size_t begin = std::min(count, w * chunk);
        const size_t end = std::min(count, begin + chunk);
        try {
            fn(w, begin, end);
        }
        catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    };

    for (unsigned w = 1; w < workers; w++)
        threads.emplace_back(run, w);
    run(0);
    for (auto& t : threads)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

}  // namespace locpir

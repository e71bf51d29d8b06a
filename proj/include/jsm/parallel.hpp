#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace jsm {

/// Execution settings threaded through the heavier operations.
///
/// Work is split into fixed index ranges and every range runs the same
/// arithmetic as a sequential pass, so results do not depend on `threads`.
struct Execution
{
    int threads = 1;
};

/// Calls fn(lo, hi) over [begin, end) split into at most `threads` contiguous chunks.
template <typename Fn>
void parallel_ranges(int begin, int end, Execution exec, Fn&& fn)
{
    int const n = end - begin;
    int const workers = std::clamp(exec.threads, 1, std::max(1, n));
    if (workers == 1 || n < 2) {
        fn(begin, end);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    int const chunk = (n + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        int const lo = begin + w * chunk;
        int const hi = std::min(end, lo + chunk);
        if (lo < hi)
            pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    fn(begin, std::min(end, begin + chunk));
}

} // namespace jsm

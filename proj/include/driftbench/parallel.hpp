#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace driftbench {

/// Calls fn(i) for i in [0, n) on up to `jobs` OpenMP threads (jobs <= 0: runtime default).
/// fn must not throw; each index is visited exactly once and results are expected to be
/// written to per-index slots so output order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
#endif
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace driftbench

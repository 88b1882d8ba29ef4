#ifndef TASEPLAB_PARALLEL_HPP
#define TASEPLAB_PARALLEL_HPP

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

// Replica-level parallelism. Every loop body writes only to its own index,
// and all randomness is derived from (seed, index), so results are
// bit-identical for any thread count, including the serial build.

namespace taseplab {

template <typename F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        body(i);
    }
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace taseplab

#endif

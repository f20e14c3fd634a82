#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pomdplab {

/// Worker cap for the OpenMP kernels. Resolution order: programmatic cap
/// (set_thread_cap), then the POMDP_LAB_THREADS environment variable,
/// then the OpenMP default. Every parallel kernel in this project is
/// schedule-independent, so the cap affects speed only, never results.
int max_threads();
void set_thread_cap(int n);  // n <= 0 clears the cap

inline int omp_thread_index() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

/// Static-schedule parallel loop over [0, n). The loop body must write to
/// disjoint slots (or reduce into per-thread state via omp_thread_index).
template <typename F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
    const int nt = max_threads();
    if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace pomdplab

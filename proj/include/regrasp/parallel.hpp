#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace regrasp {

// Parallel loop over [0, n). Each index must write only to its own output
// slot; results are then deterministic regardless of thread count.
template <typename Func>
inline void parallel_for(std::int64_t n, Func f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) f(i);
#else
    for (std::int64_t i = 0; i < n; ++i) f(i);
#endif
}

template <typename Func>
inline void serial_for(std::int64_t n, Func f) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace regrasp

#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace robench {

/// Selects between the OpenMP kernels and the serial reference loops.
/// Both paths run the same per-index body, so their outputs are bit-identical;
/// the serial path exists for testing and benchmarking.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, n). Iterations must be independent. An exception
/// thrown by any iteration is rethrown on the calling thread after the loop.
template <typename Body>
void for_each_index(Exec exec, std::ptrdiff_t n, Body&& body) {
  if (exec == Exec::parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
#pragma omp critical(robench_for_each_index)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  }
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace robench

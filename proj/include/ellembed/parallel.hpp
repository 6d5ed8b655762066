#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ellembed {

/// Number of OpenMP threads actually used for a requested count
/// (0 = runtime default). Always 1 when built without OpenMP.
inline int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

/// f(i) for i in [0, n), distributed over `threads` OpenMP threads.
/// Exceptions do not cross the parallel region; the first one thrown is
/// rethrown after the loop completes.
template <typename F>
void parallel_for(std::ptrdiff_t n, int threads, F&& f) {
#ifdef _OPENMP
  std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(ellembed_parallel_for_error)
      {
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
#else
  (void)threads;
  for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
#endif
}

}  // namespace ellembed

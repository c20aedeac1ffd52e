#pragma once

#include <cstddef>
#include <exception>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace attrcons {

// Number of worker threads for a requested --jobs value; <= 0 means "all
// available cores".
inline int effective_jobs(int requested) {
  if (requested > 0) {
    return requested;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
#endif
}

// Runs body(i) for i in [0, n). Iterations must be independent; each writes
// only its own output slot, so results are identical for any thread count.
// The first exception thrown by any iteration is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  const int threads = effective_jobs(jobs);
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
#ifdef _OPENMP
  std::exception_ptr first_error;
#pragma omp parallel for num_threads(threads) schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(attrcons_parallel_for_error)
      {
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
#else
  for (std::size_t i = 0; i < n; ++i) {
    body(i);
  }
#endif
}

}  // namespace attrcons

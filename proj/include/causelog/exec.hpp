#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace causelog {

// threads == 0 means "use all hardware threads"; threads == 1 is the serial
// path. The serial reference implementations in each module do not go through
// this helper at all; they are kept as plain loops for testing.
inline int resolve_threads(int threads) {
#ifdef _OPENMP
  if (threads <= 0) return omp_get_max_threads();
  return threads;
#else
  (void)threads;
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). Each item must be independent of the others and
// must write only to its own output slot so results are ordered and identical
// to the serial path.
template <typename Fn>
void parallel_for_index(size_t n, int threads, Fn&& fn) {
  int t = resolve_threads(threads);
#ifdef _OPENMP
  if (t > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(t)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<size_t>(i));
    }
    return;
  }
#endif
  (void)t;
  for (size_t i = 0; i < n; ++i) fn(i);
}

} // namespace causelog

#pragma once
#if defined(_OPENMP)
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
inline void omp_set_num_threads(int) {}
#endif

namespace modpi {

// Heavy kernels come in two flavours. Serial is the reference used by the
// tests; Parallel splits the outer loop with OpenMP and must agree with it
// to rounding.
enum class Exec { Serial, Parallel };

inline void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace modpi

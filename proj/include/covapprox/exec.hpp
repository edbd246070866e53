#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covapprox {

// Every hot loop in the library runs through for_each_index: the parallel
// driver is an OpenMP static-schedule loop, the serial driver is the plain
// loop kept as the reference implementation. Loop bodies write only to their
// own index slot and draw from per-index derived RNG streams, and reductions
// happen afterwards in index order, so both drivers produce bit-identical
// results for any thread count.
enum class Exec { serial, parallel };

inline Exec default_exec() {
#ifdef _OPENMP
  return Exec::parallel;
#else
  return Exec::serial;
#endif
}

template <typename F>
void for_each_index(Exec exec, std::int64_t n, F&& f) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
#else
  (void)exec;
#endif
  for (std::int64_t i = 0; i < n; ++i) f(i);
}

}  // namespace covapprox

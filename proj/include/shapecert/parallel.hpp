#pragma once

#include <cstdint>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shapecert {

/// Execution lane for the batch kernels. Every kernel has a serial
/// reference path; the parallel path must produce bitwise-identical
/// results (work items are independent, outputs land in preallocated
/// slots, reductions are order-insensitive).
enum class Exec { Serial, Parallel };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

/// Apply fn(i) for i in [0, n). Parallel lane uses a plain omp for;
/// fn must only write to per-index state.
template <class Fn>
void for_each_index(Exec exec, std::ptrdiff_t n, Fn&& fn) {
  if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
#endif
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

/// SplitMix64: counter-based generator so that point i of stream s is
/// the same value no matter which thread produces it.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// uniform double in [0,1)
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
};

/// Stream seeded from (seed, stream index); use one stream per work item.
inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  mix.next();
  return mix;
}

}  // namespace shapecert

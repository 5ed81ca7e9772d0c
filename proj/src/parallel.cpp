// SPDX-License-Identifier: Apache-2.0
#include "combenergy/parallel.hpp"

#include <atomic>

#ifdef COMB_ENERGY_HAS_OPENMP
#include <omp.h>
#endif

namespace combenergy {

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel_enabled(bool on) { g_parallel.store(on); }

bool parallel_enabled() {
#ifdef COMB_ENERGY_HAS_OPENMP
  return g_parallel.load();
#else
  return false;
#endif
}

int hardware_threads() {
#ifdef COMB_ENERGY_HAS_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace combenergy

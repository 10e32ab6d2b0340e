#include "genreg/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace genreg::par {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int apply_env_thread_cap() {
  if (const char* env = std::getenv("GENREG_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && cap < max_threads()) set_threads(cap);
    } catch (const std::exception&) {
      // unparsable value: leave the OpenMP default alone
    }
  }
  return max_threads();
}

}  // namespace genreg::par

#pragma once

// Thread-count control shared by the OpenMP kernels.

namespace genreg::par {

int max_threads();
void set_threads(int n);

// Applies the GENREG_THREADS environment cap, if set. Returns the active count.
int apply_env_thread_cap();

}  // namespace genreg::par

#include "nfsrd/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace nfsrd {

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

int configure_threads_from_env() {
  if (const char* raw = std::getenv(kThreadsEnvVar)) {
    int n = 0;
    const char* end = raw + std::strlen(raw);
    auto [ptr, ec] = std::from_chars(raw, end, n);
    if (ec == std::errc() && ptr == end && n > 0) set_num_threads(n);
  }
  return max_threads();
}

}  // namespace nfsrd

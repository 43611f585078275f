#pragma once

namespace nfsrd {

// Name of the environment variable controlling the OpenMP thread count.
inline constexpr const char* kThreadsEnvVar = "NFSRD_NUM_THREADS";

// Applies NFSRD_NUM_THREADS when set to a positive integer; otherwise leaves
// the OpenMP default (all available cores). Returns the effective count.
int configure_threads_from_env();

void set_num_threads(int n);
int max_threads();

}  // namespace nfsrd

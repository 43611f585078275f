#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nfsrd {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a path of stream
// identifiers, e.g. derive_seed(seed, {kForestStream, tree_index}). The result
// depends only on the arguments, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = splitmix64(base);
  for (std::uint64_t id : path) {
    state = splitmix64(state ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  }
  return state;
}

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(base, path));
}

// Stream identifiers used across modules. Values are arbitrary but fixed.
namespace stream {
inline constexpr std::uint64_t kTree = 1;
inline constexpr std::uint64_t kBcfiRepetition = 2;
inline constexpr std::uint64_t kShadow = 3;
inline constexpr std::uint64_t kBcfiForest = 4;
inline constexpr std::uint64_t kPartition = 5;
inline constexpr std::uint64_t kFullForest = 6;
inline constexpr std::uint64_t kReducedForest = 7;
inline constexpr std::uint64_t kKernelTest = 8;
inline constexpr std::uint64_t kPermutation = 9;
inline constexpr std::uint64_t kMlpInit = 10;
inline constexpr std::uint64_t kSubset = 11;
inline constexpr std::uint64_t kBenchmarkRep = 12;
inline constexpr std::uint64_t kKrrFolds = 13;
inline constexpr std::uint64_t kMtryFolds = 14;
}  // namespace stream

}  // namespace nfsrd

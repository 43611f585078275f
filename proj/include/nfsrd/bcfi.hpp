#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfsrd/dataset.hpp"
#include "nfsrd/forest.hpp"
#include "nfsrd/rng.hpp"

namespace nfsrd {

enum class Metric { kBcfi, kMinDepth };

std::string to_string(Metric metric);
// Accepts "bcfi" and "min_depth"; throws DataError otherwise.
Metric parse_metric(const std::string& name);

// Per-feature importance with the descending (bcfi) or ascending (min_depth)
// feature order. For kMinDepth, `bcfi` holds mean minimal depths and `per_rep`
// holds one row per repetition.
struct ImportanceReport {
  std::vector<double> bcfi;
  std::vector<std::vector<double>> per_rep;
  std::vector<std::size_t> order;
  Metric metric = Metric::kBcfi;
};

// Appends p shadow columns: the original rows under one random row
// permutation shared by all columns. Shadow column p + k is named
// "shadow_<name_k>".
Dataset shadow_augment(const Dataset& data, Rng& rng);

// Shadow-debiased importance on the rows in `subset`, averaged over
// `repetitions` independent shadow draws. Throws DataError if the subset is
// larger than the data, an index is out of range, or repetitions == 0.
//
// With Metric::kMinDepth each repetition fits a forest on the original
// features only and records min_depth_importance; the order is ascending.
ImportanceReport compute_bcfi(const Dataset& data, std::span<const std::size_t> subset,
                              std::size_t repetitions, const RfParams& params, std::uint64_t seed,
                              Metric metric = Metric::kBcfi);

// Uniform random subset of size m0 drawn from 0..n-1, sorted ascending.
std::vector<std::size_t> draw_subset(std::size_t n, std::size_t m0, std::uint64_t seed);

// Stable ordering; ties by ascending index.
std::vector<std::size_t> rank_features(std::span<const double> values, bool ascending);

}  // namespace nfsrd

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nfsrd/dataset.hpp"
#include "nfsrd/fsd.hpp"

namespace nfsrd {

enum class FeatureLaw {
  kUniform,  // U(1, 10)
  kBeta,     // 14.5 Beta(2, 4) + 1
};

// Models 1-3 use uniform features, 4-6 the skewed beta law:
//   1, 4: y = 0.3 x1 + 0.3 x2 + e
//   2, 5: y = 3 sin(x1) + e
//   3, 6: y = 5 sin(x1 / 10) sqrt(x2) + e
// with e ~ N(0, noise_sd^2).
struct ModelSpec {
  int model_id = 1;
  std::size_t n = 2000;
  std::size_t p = 50;
  bool correlated = false;  // x1 = x1', xk = 0.7 xk' + 0.3 x(k-1)'
  std::uint64_t seed = 0;
  double noise_sd = 1.0;
};

struct SyntheticData {
  Dataset data;
  std::vector<std::size_t> true_features;  // 0-based
};

// Throws DataError for model ids outside 1..6.
void check_model_id(int model_id);
FeatureLaw feature_law(int model_id);
std::vector<std::size_t> true_features(int model_id);
// Noise-free regression function; reads only the useful components of x.
double regression_function(int model_id, std::span<const double> x);

double draw_feature(FeatureLaw law, Rng& rng);

// Throws DataError for unknown models, n == 0 or p below the model's number
// of useful features.
SyntheticData gen_model(const ModelSpec& spec);

// Monte Carlo sqrt(var f(X)); the noise variance is 1. Requires mc_size >= 1000.
double estimate_snr(const ModelSpec& spec, std::size_t mc_size);
double estimate_snr(const std::function<double(std::span<const double>)>& f, FeatureLaw law,
                    std::size_t n_inputs, std::size_t mc_size, std::uint64_t seed);

struct BenchmarkRun {
  int model_id = 0;
  std::size_t rep = 0;
  std::size_t hits = 0;
  std::size_t wrong = 0;
  std::size_t useful = 0;
  double seconds = 0.0;
  std::vector<std::size_t> selected;
};

struct BenchmarkSummary {
  int model_id = 0;
  std::size_t reps = 0;
  double mu_c = 0.0;
  double n_w = 0.0;
  double mean_seconds = 0.0;
};

struct BenchmarkTable {
  std::vector<BenchmarkRun> runs;
  std::vector<BenchmarkSummary> summaries;
};

using BenchmarkProgress = std::function<void(const BenchmarkRun&)>;

// For each model and rep: generate data with a derived seed, run importance +
// forward selection with a derived selection seed, and score the result.
// Throws DataError when reps == 0.
BenchmarkTable run_benchmark(std::span<const ModelSpec> models, const SelectionConfig& config,
                             std::size_t reps, const BenchmarkProgress& progress = {});

BenchmarkSummary summarize_runs(int model_id, std::span<const BenchmarkRun> runs);

}  // namespace nfsrd

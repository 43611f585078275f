#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nfsrd/bcfi.hpp"
#include "nfsrd/dataset.hpp"
#include "nfsrd/deep_mmd.hpp"
#include "nfsrd/forest.hpp"
#include "nfsrd/rng.hpp"

namespace nfsrd {

// Disjoint index sets: a0 ranks features, a3 trains the full model, a4 the
// reduced models, a1 and a2 supply the two residual samples.
struct Partition {
  std::vector<std::size_t> a0, a1, a2, a3, a4;
};

// Throws DataError naming the constraint when m0 + 2 m1 + 2 m2 > n.
Partition partition_indices(std::size_t n, std::size_t m0, std::size_t m1, std::size_t m2, Rng& rng);

// Throws DataError if any two sets share an index or an index is >= n.
void check_disjoint(const Partition& partition, std::size_t n);

using Predictor = std::function<double(std::span<const double>)>;

// y_i - model(x_i) for each row; with a feature subset the model receives the
// selected components in subset order.
std::vector<double> residuals(const Predictor& model, const Dataset& data,
                              std::span<const std::size_t> rows,
                              std::optional<std::span<const std::size_t>> feature_subset = std::nullopt);

Predictor as_predictor(const Forest& forest);

// Gaussian-kernel ridge regression on one input.
class KrrModel {
 public:
  KrrModel(std::vector<double> xs, Eigen::VectorXd coefficients, double lengthscale, double ridge);
  double operator()(double x) const;
  double lengthscale() const { return lengthscale_; }
  double ridge() const { return ridge_; }

 private:
  std::vector<double> xs_;
  Eigen::VectorXd coefficients_;
  double lengthscale_;
  double ridge_;
};

// Solves (G + ridge I) c = y. Throws DataError for an empty sample, a
// non-positive lengthscale, negative ridge, or a singular system at ridge 0.
KrrModel fit_krr(std::span<const double> xs, std::span<const double> ys, double lengthscale, double ridge);

struct KrrConfig {
  std::optional<double> lengthscale;  // unset: median pairwise distance
  double ridge = 1e-3;
  bool cross_validate = false;        // 5-fold search over {1e-4, ..., 1}
};

KrrModel fit_krr(std::span<const double> xs, std::span<const double> ys, const KrrConfig& config,
                 std::uint64_t seed = 0);

struct SelectionConfig {
  std::size_t m0 = 400;
  std::size_t m1 = 400;
  std::size_t m2 = 400;
  double alpha = 0.05;
  std::size_t repetitions = 100;  // BCFI repetitions R
  RfParams rf;
  TrainConfig kernel_train;       // seed field is ignored; streams derive from `seed`
  std::size_t n_perm = 100;
  Metric metric = Metric::kBcfi;
  std::uint64_t seed = 0;
  bool krr_first_step = true;     // KRR reduced model at K = 1, RF otherwise
  KrrConfig krr;
  bool bonferroni = false;        // test each step at alpha / p
  // Pick mtry for the full and reduced forests by 5-fold CV when rf.mtry is
  // unset. The ceil(p/3) default underfits sparse signals badly enough to
  // make the residual test reject spuriously.
  bool tune_mtry = true;

  // Throws DataError on alpha outside (0, 1), zero sizes, or n_perm == 0.
  void validate() const;
};

struct StepResult {
  std::size_t k = 0;
  TestResult test;
};

struct SelectionResult {
  std::vector<std::size_t> order;
  std::vector<StepResult> tests;  // one per tested K, in order
  std::size_t k_hat = 0;
  std::vector<std::size_t> selected;  // order[0..k_hat)
  bool exhausted = false;
};

// Partition used by select_features/forward_select for a given config.
Partition partition_for(std::size_t n, const SelectionConfig& config);

// Sequential tests of "full and K-feature residuals share a distribution"
// for K = 1, 2, ...; stops at the first non-rejection.
SelectionResult forward_select(const Dataset& data, const ImportanceReport& report,
                               const SelectionConfig& config);

struct PipelineResult {
  ImportanceReport importance;
  SelectionResult selection;
  double importance_seconds = 0.0;
  double selection_seconds = 0.0;
};

// Importance on a0 followed by forward selection on a1..a4.
PipelineResult select_features(const Dataset& data, const SelectionConfig& config);

struct SelectionScore {
  double hit_fraction = 0.0;  // |selected ∩ true| / |true|
  std::size_t wrong = 0;      // |selected \ true|
};

// Throws DataError if true_features is empty.
SelectionScore evaluate_selection(std::span<const std::size_t> selected,
                                  std::span<const std::size_t> true_features);

}  // namespace nfsrd

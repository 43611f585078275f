#include "nfsrd/fsd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "nfsrd/error.hpp"

namespace nfsrd {

Partition partition_indices(std::size_t n, std::size_t m0, std::size_t m1, std::size_t m2, Rng& rng) {
  const std::size_t required = m0 + 2 * m1 + 2 * m2;
  if (required > n) {
    throw DataError("infeasible subsample sizes: m0 + 2*m1 + 2*m2 = " + std::to_string(required) +
                    " exceeds n = " + std::to_string(n));
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::shuffle(all.begin(), all.end(), rng);

  Partition partition;
  auto take = [&, pos = std::size_t{0}](std::size_t size) mutable {
    std::vector<std::size_t> out(all.begin() + static_cast<std::ptrdiff_t>(pos),
                                 all.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
    return out;
  };
  partition.a0 = take(m0);
  partition.a1 = take(m1);
  partition.a2 = take(m1);
  partition.a3 = take(m2);
  partition.a4 = take(m2);
  return partition;
}

void check_disjoint(const Partition& partition, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto* set : {&partition.a0, &partition.a1, &partition.a2, &partition.a3, &partition.a4}) {
    for (std::size_t i : *set) {
      if (i >= n) throw DataError("partition index out of range");
      if (seen[i]) throw DataError("partition sets are not disjoint");
      seen[i] = 1;
    }
  }
}

std::vector<double> residuals(const Predictor& model, const Dataset& data,
                              std::span<const std::size_t> rows,
                              std::optional<std::span<const std::size_t>> feature_subset) {
  std::vector<double> out;
  out.reserve(rows.size());
  std::vector<double> reduced;
  for (std::size_t r : rows) {
    if (r >= data.rows()) throw DataError("row index out of range");
    const auto x = data.row(r);
    double prediction;
    if (feature_subset) {
      reduced.clear();
      for (std::size_t k : *feature_subset) {
        if (k >= data.cols()) throw DataError("dimension mismatch: feature index out of range");
        reduced.push_back(x[k]);
      }
      prediction = model(reduced);
    } else {
      prediction = model(x);
    }
    out.push_back(data.response()[r] - prediction);
  }
  return out;
}

Predictor as_predictor(const Forest& forest) {
  return [&forest](std::span<const double> x) { return predict(forest, x); };
}

KrrModel::KrrModel(std::vector<double> xs, Eigen::VectorXd coefficients, double lengthscale, double ridge)
    : xs_(std::move(xs)), coefficients_(std::move(coefficients)), lengthscale_(lengthscale), ridge_(ridge) {}

double KrrModel::operator()(double x) const {
  const double scale = 1.0 / (2.0 * lengthscale_ * lengthscale_);
  double total = 0.0;
  for (std::size_t j = 0; j < xs_.size(); ++j) {
    const double d = x - xs_[j];
    total += coefficients_(static_cast<Eigen::Index>(j)) * std::exp(-d * d * scale);
  }
  return total;
}

KrrModel fit_krr(std::span<const double> xs, std::span<const double> ys, double lengthscale, double ridge) {
  if (xs.empty()) throw DataError("KRR needs at least one training point");
  if (xs.size() != ys.size()) throw DataError("KRR inputs and responses differ in length");
  if (!(lengthscale > 0.0)) throw DataError("KRR lengthscale must be positive");
  if (ridge < 0.0) throw DataError("KRR ridge must be non-negative");

  const auto n = static_cast<Eigen::Index>(xs.size());
  const double scale = 1.0 / (2.0 * lengthscale * lengthscale);
  Eigen::MatrixXd system(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
      system(i, j) = std::exp(-d * d * scale);
    }
  }
  system.diagonal().array() += ridge;
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);

  Eigen::VectorXd coefficients;
  if (ridge > 0.0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    if (ldlt.info() != Eigen::Success) throw DataError("KRR system could not be factorized");
    coefficients = ldlt.solve(y);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
    if (qr.rank() < n) {
      throw DataError("KRR system is singular with ridge = 0; use ridge > 0");
    }
    coefficients = qr.solve(y);
  }
  return KrrModel(std::vector<double>(xs.begin(), xs.end()), std::move(coefficients), lengthscale, ridge);
}

KrrModel fit_krr(std::span<const double> xs, std::span<const double> ys, const KrrConfig& config,
                 std::uint64_t seed) {
  double lengthscale = config.lengthscale.value_or(median_pairwise_distance(xs));
  if (!(lengthscale > 0.0)) lengthscale = 1.0;
  if (!config.cross_validate || xs.size() < 10) return fit_krr(xs, ys, lengthscale, config.ridge);

  constexpr std::size_t kFolds = 5;
  constexpr double kGrid[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<std::size_t> perm(xs.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed, {stream::kKrrFolds});
  std::shuffle(perm.begin(), perm.end(), rng);

  double best_ridge = config.ridge;
  double best_error = std::numeric_limits<double>::infinity();
  for (double ridge : kGrid) {
    double error = 0.0;
    for (std::size_t fold = 0; fold < kFolds; ++fold) {
      std::vector<double> train_x, train_y, test_x, test_y;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        const bool held_out = i % kFolds == fold;
        (held_out ? test_x : train_x).push_back(xs[perm[i]]);
        (held_out ? test_y : train_y).push_back(ys[perm[i]]);
      }
      const KrrModel model = fit_krr(train_x, train_y, lengthscale, ridge);
      for (std::size_t i = 0; i < test_x.size(); ++i) {
        const double e = test_y[i] - model(test_x[i]);
        error += e * e;
      }
    }
    if (error < best_error) {
      best_error = error;
      best_ridge = ridge;
    }
  }
  return fit_krr(xs, ys, lengthscale, best_ridge);
}

void SelectionConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
  if (m0 == 0 || m1 == 0 || m2 == 0) throw DataError("subsample sizes must be positive");
  if (m1 < 8) throw DataError("m1 must be at least 8 (the MMD-D test splits each residual sample)");
  if (repetitions == 0) throw DataError("number of repetitions R must be positive");
  if (n_perm == 0) throw DataError("n_perm must be positive");
}

Partition partition_for(std::size_t n, const SelectionConfig& config) {
  Rng rng = make_rng(config.seed, {stream::kPartition});
  Partition partition = partition_indices(n, config.m0, config.m1, config.m2, rng);
  check_disjoint(partition, n);
  return partition;
}

namespace {

void check_order(std::span<const std::size_t> order, std::size_t p) {
  if (order.size() != p) throw DataError("feature order length does not match the data");
  std::vector<char> seen(p, 0);
  for (std::size_t k : order) {
    if (k >= p || seen[k]) throw DataError("feature order is not a permutation");
    seen[k] = 1;
  }
}

}  // namespace

SelectionResult forward_select(const Dataset& data, const ImportanceReport& report,
                               const SelectionConfig& config) {
  config.validate();
  const std::size_t p = data.cols();
  check_order(report.order, p);
  const Partition partition = partition_for(data.rows(), config);

  SelectionResult result;
  result.order = report.order;

  const Dataset full_pool = data.subset_rows(partition.a3);
  RfParams full_rf = config.rf;
  if (config.tune_mtry && !full_rf.mtry) {
    full_rf.mtry = tune_mtry(full_pool, full_rf, derive_seed(config.seed, {stream::kMtryFolds}));
  }
  const Forest full = fit_forest(full_pool, full_rf, derive_seed(config.seed, {stream::kFullForest}));
  const std::vector<double> full_residuals = residuals(as_predictor(full), data, partition.a1);
  const Dataset reduced_pool = data.subset_rows(partition.a4);
  const double step_alpha = config.bonferroni ? config.alpha / static_cast<double>(p) : config.alpha;

  for (std::size_t k = 1; k <= p; ++k) {
    const std::span<const std::size_t> prefix(result.order.data(), k);
    std::vector<double> reduced_residuals;
    if (k == 1 && config.krr_first_step) {
      const std::vector<double> xs = reduced_pool.column(prefix[0]);
      const auto ys = reduced_pool.response();
      const KrrModel krr =
          fit_krr(xs, ys, config.krr, derive_seed(config.seed, {stream::kKrrFolds}));
      const Predictor model = [&krr](std::span<const double> x) { return krr(x[0]); };
      reduced_residuals = residuals(model, data, partition.a2, prefix);
    } else {
      RfParams rf = config.rf;
      const Dataset reduced_data = reduced_pool.select_columns(prefix);
      if (rf.mtry) {
        rf.mtry = std::min(*rf.mtry, k);
      } else if (config.tune_mtry) {
        rf.mtry = tune_mtry(reduced_data, rf, derive_seed(config.seed, {stream::kMtryFolds, k}));
      }
      const Forest reduced = fit_forest(reduced_data, rf,
                                        derive_seed(config.seed, {stream::kReducedForest, k}));
      reduced_residuals = residuals(as_predictor(reduced), data, partition.a2, prefix);
    }

    MmdTestConfig test_config;
    test_config.train = config.kernel_train;
    test_config.train.seed = derive_seed(config.seed, {stream::kKernelTest, k});
    test_config.n_perm = config.n_perm;
    test_config.alpha = step_alpha;
    const MmdTestOutcome outcome = mmd_d_test(full_residuals, reduced_residuals, test_config);
    result.tests.push_back({k, outcome.result});
    if (!outcome.result.reject) {
      result.k_hat = k;
      break;
    }
  }
  if (result.k_hat == 0) {
    result.k_hat = p;
    result.exhausted = true;
  }
  result.selected.assign(result.order.begin(),
                         result.order.begin() + static_cast<std::ptrdiff_t>(result.k_hat));
  return result;
}

PipelineResult select_features(const Dataset& data, const SelectionConfig& config) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  const Partition partition = partition_for(data.rows(), config);
  PipelineResult out;
  const auto t0 = Clock::now();
  out.importance = compute_bcfi(data, partition.a0, config.repetitions, config.rf,
                                derive_seed(config.seed, {stream::kBcfiRepetition}), config.metric);
  const auto t1 = Clock::now();
  out.selection = forward_select(data, out.importance, config);
  const auto t2 = Clock::now();
  out.importance_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.selection_seconds = std::chrono::duration<double>(t2 - t1).count();
  return out;
}

SelectionScore evaluate_selection(std::span<const std::size_t> selected,
                                  std::span<const std::size_t> true_features) {
  if (true_features.empty()) throw DataError("true feature set must not be empty");
  const std::set<std::size_t> truth(true_features.begin(), true_features.end());
  const std::set<std::size_t> chosen(selected.begin(), selected.end());
  SelectionScore score;
  std::size_t hits = 0;
  for (std::size_t k : chosen) {
    if (truth.count(k)) {
      ++hits;
    } else {
      ++score.wrong;
    }
  }
  score.hit_fraction = static_cast<double>(hits) / static_cast<double>(truth.size());
  return score;
}

}  // namespace nfsrd

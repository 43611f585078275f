#include "nfsrd/bcfi.hpp"

#include <algorithm>
#include <numeric>

#include "nfsrd/error.hpp"

namespace nfsrd {

std::string to_string(Metric metric) {
  return metric == Metric::kBcfi ? "bcfi" : "min_depth";
}

Metric parse_metric(const std::string& name) {
  if (name == "bcfi") return Metric::kBcfi;
  if (name == "min_depth") return Metric::kMinDepth;
  throw DataError("unknown metric '" + name + "' (expected bcfi or min_depth)");
}

Dataset shadow_augment(const Dataset& data, Rng& rng) {
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<double> features;
  features.reserve(n * 2 * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto original = data.row(i);
    const auto shadow = data.row(perm[i]);
    features.insert(features.end(), original.begin(), original.end());
    features.insert(features.end(), shadow.begin(), shadow.end());
  }
  std::vector<std::string> names = data.names();
  for (std::size_t k = 0; k < p; ++k) names.push_back("shadow_" + data.names()[k]);
  const auto y = data.response();
  return Dataset(std::move(features), std::move(names), std::vector<double>(y.begin(), y.end()));
}

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t m0, std::uint64_t seed) {
  if (m0 > n) {
    throw DataError("subset size m0=" + std::to_string(m0) + " exceeds n=" + std::to_string(n));
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng = make_rng(seed, {stream::kSubset});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(m0);
  std::sort(all.begin(), all.end());
  return all;
}

ImportanceReport compute_bcfi(const Dataset& data, std::span<const std::size_t> subset,
                              std::size_t repetitions, const RfParams& params, std::uint64_t seed,
                              Metric metric) {
  if (subset.size() > data.rows()) {
    throw DataError("subset size m0=" + std::to_string(subset.size()) +
                    " exceeds n=" + std::to_string(data.rows()));
  }
  if (subset.empty()) throw DataError("subset must not be empty");
  if (repetitions == 0) throw DataError("number of repetitions R must be positive");
  const std::size_t p = data.cols();
  params.validate(metric == Metric::kBcfi ? 2 * p : p);

  const Dataset sample = data.subset_rows(subset);
  ImportanceReport report;
  report.metric = metric;
  report.per_rep.assign(repetitions, std::vector<double>(p, 0.0));

  // Repetitions run in parallel; the forests inside them then run on one
  // thread each because nested parallelism is off.
  const auto reps = static_cast<std::int64_t>(repetitions);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < reps; ++r) {
    const auto rep = static_cast<std::uint64_t>(r);
    auto& row = report.per_rep[static_cast<std::size_t>(r)];
    const std::uint64_t forest_seed = derive_seed(seed, {stream::kBcfiForest, rep});
    if (metric == Metric::kBcfi) {
      Rng shadow_rng = make_rng(seed, {stream::kShadow, rep});
      const Dataset augmented = shadow_augment(sample, shadow_rng);
      // Split ties go to the lowest column index, which would favour the
      // originals over their shadows in small nodes. A fresh column layout
      // per repetition makes the two exchangeable.
      std::vector<std::size_t> layout(2 * p);
      std::iota(layout.begin(), layout.end(), std::size_t{0});
      std::shuffle(layout.begin(), layout.end(), shadow_rng);
      const std::vector<double> shuffled =
          importance(fit_forest(augmented.select_columns(layout), params, forest_seed));
      std::vector<double> raw(2 * p);
      for (std::size_t c = 0; c < 2 * p; ++c) raw[layout[c]] = shuffled[c];
      for (std::size_t k = 0; k < p; ++k) row[k] = raw[k] - raw[p + k];
    } else {
      row = min_depth_importance(fit_forest(sample, params, forest_seed));
    }
  }

  report.bcfi.assign(p, 0.0);
  for (const auto& row : report.per_rep) {
    for (std::size_t k = 0; k < p; ++k) report.bcfi[k] += row[k];
  }
  for (double& v : report.bcfi) v /= static_cast<double>(repetitions);
  report.order = rank_features(report.bcfi, metric == Metric::kMinDepth);
  return report;
}

std::vector<std::size_t> rank_features(std::span<const double> values, bool ascending) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? values[a] < values[b] : values[a] > values[b];
  });
  return order;
}

}  // namespace nfsrd

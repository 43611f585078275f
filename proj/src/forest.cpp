#include "nfsrd/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "nfsrd/error.hpp"

namespace nfsrd {

std::size_t RfParams::resolved_mtry(std::size_t p) const {
  if (mtry) return *mtry;
  return std::max<std::size_t>(1, (p + 2) / 3);
}

void RfParams::validate(std::size_t p) const {
  if (n_trees == 0) throw DataError("n_trees must be at least 1");
  if (min_node < 2) throw DataError("min_node must be at least 2");
  const std::size_t m = resolved_mtry(p);
  if (m < 1 || m > p) throw DataError("mtry must lie in [1, p]");
}

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const Node& node = nodes[i];
    i = static_cast<std::size_t>(x[node.feature] <= node.threshold ? node.left : node.right);
  }
  return nodes[i].value;
}

std::size_t Tree::max_depth() const {
  std::size_t depth = 0;
  for (const Node& node : nodes) depth = std::max(depth, node.depth);
  return depth;
}

namespace {

// Column-major copy of the feature matrix; split search scans one column at
// a time.
struct ColumnMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> values;

  explicit ColumnMatrix(const Dataset& data) : n(data.rows()), p(data.cols()), values(n * p) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < p; ++k) values[k * n + i] = data.at(i, k);
    }
  }
  double at(std::size_t row, std::size_t col) const { return values[col * n + row]; }
};

class TreeGrower {
 public:
  TreeGrower(const ColumnMatrix& x, std::span<const double> y, const RfParams& params, Rng& rng,
             std::size_t train_size)
      : x_(x),
        y_(y),
        params_(params),
        mtry_(params.resolved_mtry(x.p)),
        rng_(rng),
        train_size_(static_cast<double>(train_size)),
        feature_pool_(x.p) {
    std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
    tree_.n_features = x.p;
    tree_.train_size = train_size;
  }

  Tree grow(std::vector<std::size_t> rows) {
    grow_node(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
  };

  std::int32_t grow_node(std::vector<std::size_t>& rows, std::size_t depth) {
    const std::size_t count = rows.size();
    double sum = 0.0;
    for (std::size_t r : rows) sum += y_[r];
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    bool constant = true;
    const double first = y_[rows.front()];
    for (std::size_t r : rows) {
      const double d = y_[r] - mean;
      ss += d * d;
      constant = constant && (y_[r] == first);
    }

    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    {
      Node node;
      node.depth = depth;
      node.count = count;
      node.value = constant ? first : mean;
      node.weight = static_cast<double>(count) / train_size_;
      node.variance = constant ? 0.0 : ss / static_cast<double>(count);
      tree_.nodes.push_back(node);
    }

    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (count < params_.min_node || constant || depth_capped) return index;

    const Split split = best_split(rows, sum, ss);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    left_rows.reserve(count);
    right_rows.reserve(count);
    for (std::size_t r : rows) {
      (x_.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const std::int32_t left = grow_node(left_rows, depth + 1);
    const std::int32_t right = grow_node(right_rows, depth + 1);

    Node& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    const Node& l = tree_.nodes[static_cast<std::size_t>(left)];
    const Node& r = tree_.nodes[static_cast<std::size_t>(right)];
    node.left_weight = l.weight;
    node.left_variance = l.variance;
    node.right_weight = r.weight;
    node.right_variance = r.variance;
    return index;
  }

  // Candidates are scanned in ascending feature order and thresholds in
  // ascending order; only a strictly larger gain replaces the incumbent, so
  // ties go to the lowest feature index, then the lowest threshold.
  Split best_split(const std::vector<std::size_t>& rows, double sum, double ss) {
    const std::size_t p = x_.p;
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p - 1);
      std::swap(feature_pool_[i], feature_pool_[pick(rng_)]);
    }
    std::vector<std::size_t> candidates(feature_pool_.begin(),
                                        feature_pool_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(candidates.begin(), candidates.end());

    const std::size_t n = rows.size();
    const double n_total = static_cast<double>(n);
    const double base = sum * sum / n_total;
    double best_gain = 1e-12 * ss;
    Split best;

    auto& pairs = scratch_;
    pairs.resize(n);
    for (std::size_t feature : candidates) {
      for (std::size_t i = 0; i < n; ++i) pairs[i] = {x_.at(rows[i], feature), y_[rows[i]]};
      std::sort(pairs.begin(), pairs.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (pairs.front().first == pairs.back().first) continue;

      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += pairs[i].second;
        if (!(pairs[i].first < pairs[i + 1].first)) continue;
        const double n_left = static_cast<double>(i + 1);
        const double right_sum = sum - left_sum;
        const double gain =
            left_sum * left_sum / n_left + right_sum * right_sum / (n_total - n_left) - base;
        if (gain > best_gain) {
          best_gain = gain;
          best.feature = static_cast<int>(feature);
          double mid = pairs[i].first + 0.5 * (pairs[i + 1].first - pairs[i].first);
          if (!(mid < pairs[i + 1].first)) mid = pairs[i].first;
          best.threshold = mid;
        }
      }
    }
    return best;
  }

  const ColumnMatrix& x_;
  std::span<const double> y_;
  const RfParams& params_;
  std::size_t mtry_;
  Rng& rng_;
  double train_size_;
  std::vector<std::size_t> feature_pool_;
  std::vector<std::pair<double, double>> scratch_;
  Tree tree_;
};

Tree grow_forest_tree(const ColumnMatrix& x, std::span<const double> y, const RfParams& params,
                      std::uint64_t seed, std::size_t b) {
  Rng rng = make_rng(seed, {stream::kTree, b});
  std::vector<std::size_t> rows(x.n);
  if (params.bootstrap) {
    std::uniform_int_distribution<std::size_t> draw(0, x.n - 1);
    for (auto& r : rows) r = draw(rng);
  } else {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  return TreeGrower(x, y, params, rng, x.n).grow(std::move(rows));
}

Forest empty_forest(const Dataset& data, const RfParams& params, std::uint64_t seed) {
  params.validate(data.cols());
  Forest forest;
  forest.params = params;
  forest.train_size = data.rows();
  forest.n_features = data.cols();
  forest.seed = seed;
  forest.trees.resize(params.n_trees);
  return forest;
}

}  // namespace

Tree fit_tree(const Dataset& data, std::span<const std::size_t> row_indices,
              const RfParams& params, Rng& rng) {
  if (row_indices.empty()) throw DataError("empty node");
  params.validate(data.cols());
  for (std::size_t r : row_indices) {
    if (r >= data.rows()) throw DataError("row index out of range");
  }
  const ColumnMatrix x(data);
  std::vector<std::size_t> rows(row_indices.begin(), row_indices.end());
  return TreeGrower(x, data.response(), params, rng, rows.size()).grow(std::move(rows));
}

Forest fit_forest(const Dataset& data, const RfParams& params, std::uint64_t seed) {
  Forest forest = empty_forest(data, params, seed);
  const ColumnMatrix x(data);
  const auto n_trees = static_cast<std::int64_t>(params.n_trees);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < n_trees; ++b) {
    forest.trees[static_cast<std::size_t>(b)] =
        grow_forest_tree(x, data.response(), params, seed, static_cast<std::size_t>(b));
  }
  return forest;
}

namespace serial {
Forest fit_forest(const Dataset& data, const RfParams& params, std::uint64_t seed) {
  Forest forest = empty_forest(data, params, seed);
  const ColumnMatrix x(data);
  for (std::size_t b = 0; b < params.n_trees; ++b) {
    forest.trees[b] = grow_forest_tree(x, data.response(), params, seed, b);
  }
  return forest;
}
}  // namespace serial

std::size_t tune_mtry(const Dataset& data, const RfParams& params, std::uint64_t seed,
                      const MtryTuning& tuning) {
  const std::size_t p = data.cols();
  const std::size_t n = data.rows();
  std::vector<std::size_t> grid{std::max<std::size_t>(1, (p + 2) / 3),
                                std::max<std::size_t>(1, (2 * p + 2) / 3), p};
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() == 1 || n < 2 * tuning.folds) return grid.front();

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed, {stream::kMtryFolds});
  std::shuffle(perm.begin(), perm.end(), rng);

  RfParams cv = params;
  cv.n_trees = std::min(params.n_trees, tuning.max_trees);
  std::size_t best = grid.front();
  double best_error = std::numeric_limits<double>::infinity();
  for (std::size_t mtry : grid) {
    cv.mtry = mtry;
    double error = 0.0;
    for (std::size_t fold = 0; fold < tuning.folds; ++fold) {
      std::vector<std::size_t> train;
      std::vector<std::size_t> held_out;
      for (std::size_t i = 0; i < n; ++i) (i % tuning.folds == fold ? held_out : train).push_back(perm[i]);
      const Forest forest = fit_forest(data.subset_rows(train), cv, derive_seed(seed, {mtry, fold}));
      for (std::size_t r : held_out) {
        const double e = data.response()[r] - predict(forest, data.row(r));
        error += e * e;
      }
    }
    if (error < best_error) {
      best_error = error;
      best = mtry;
    }
  }
  return best;
}

double predict(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features) {
    throw DataError("dimension mismatch: forest expects " + std::to_string(forest.n_features) +
                    " features, got " + std::to_string(x.size()));
  }
  double total = 0.0;
  for (const Tree& tree : forest.trees) total += tree.predict(x);
  return total / static_cast<double>(forest.trees.size());
}

double weighted_variance_decrease(const Node& node) {
  if (node.is_leaf()) return 0.0;
  return node.weight * node.variance - node.left_weight * node.left_variance -
         node.right_weight * node.right_variance;
}

std::vector<double> importance(const Tree& tree) {
  std::vector<double> values(tree.n_features, 0.0);
  for (const Node& node : tree.nodes) {
    if (!node.is_leaf()) values[static_cast<std::size_t>(node.feature)] += weighted_variance_decrease(node);
  }
  return values;
}

std::vector<double> importance(const Forest& forest) {
  std::vector<double> values(forest.n_features, 0.0);
  for (const Tree& tree : forest.trees) {
    const std::vector<double> per_tree = importance(tree);
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += per_tree[k];
  }
  for (double& v : values) v /= static_cast<double>(forest.trees.size());
  return values;
}

std::vector<double> min_depth_importance(const Forest& forest) {
  std::vector<double> values(forest.n_features, 0.0);
  for (const Tree& tree : forest.trees) {
    std::vector<std::size_t> depth(forest.n_features, tree.max_depth() + 1);
    for (const Node& node : tree.nodes) {
      if (node.is_leaf()) continue;
      auto& d = depth[static_cast<std::size_t>(node.feature)];
      d = std::min(d, node.depth);
    }
    for (std::size_t k = 0; k < values.size(); ++k) values[k] += static_cast<double>(depth[k]);
  }
  for (double& v : values) v /= static_cast<double>(forest.trees.size());
  return values;
}

}  // namespace nfsrd

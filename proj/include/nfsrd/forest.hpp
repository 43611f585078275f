#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nfsrd/dataset.hpp"
#include "nfsrd/rng.hpp"

namespace nfsrd {

struct RfParams {
  std::size_t n_trees = 100;
  // Candidate features per split; unset means max(1, ceil(p / 3)).
  std::optional<std::size_t> mtry;
  std::size_t min_node = 5;
  std::optional<std::size_t> max_depth;
  bool bootstrap = true;

  std::size_t resolved_mtry(std::size_t p) const;
  // Throws DataError on n_trees == 0, min_node < 2 or mtry outside [1, p].
  void validate(std::size_t p) const;
};

// One node of a regression tree. Leaves have feature == -1. Internal nodes
// carry the split statistics needed for impurity importance: weights are node
// counts divided by the tree's training size, variances are population
// variances of the responses reaching the node.
struct Node {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::size_t depth = 0;
  std::size_t count = 0;
  double value = 0.0;  // mean response

  double weight = 0.0;
  double variance = 0.0;
  double left_weight = 0.0;
  double left_variance = 0.0;
  double right_weight = 0.0;
  double right_variance = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;
  std::size_t train_size = 0;

  double predict(std::span<const double> x) const;
  std::size_t max_depth() const;
};

struct Forest {
  std::vector<Tree> trees;
  RfParams params;
  std::size_t train_size = 0;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
};

// Grows one CART regression tree on data rows `row_indices` (duplicates are
// treated as separate instances). Throws DataError("empty node") when
// row_indices is empty.
Tree fit_tree(const Dataset& data, std::span<const std::size_t> row_indices,
              const RfParams& params, Rng& rng);

// Trees are fitted in parallel; tree b draws from derive_seed(seed, {kTree, b})
// so the forest does not depend on the thread count.
Forest fit_forest(const Dataset& data, const RfParams& params, std::uint64_t seed);

// Throws DataError when x.size() differs from the training feature count.
double predict(const Forest& forest, std::span<const double> x);

// w V - w_l V_l - w_r V_r for an internal node; 0 for leaves.
double weighted_variance_decrease(const Node& node);

// Impurity importance: sum of weighted variance decreases per feature,
// averaged over trees.
std::vector<double> importance(const Forest& forest);
std::vector<double> importance(const Tree& tree);

// Mean over trees of the shallowest split depth on each feature (root = 0).
// A tree that never splits on a feature contributes its max depth + 1.
std::vector<double> min_depth_importance(const Forest& forest);

struct MtryTuning {
  std::size_t folds = 5;
  std::size_t max_trees = 50;  // trees per forest during the search
};

// K-fold cross-validated choice of mtry among {ceil(p/3), ceil(2p/3), p}
// (deduplicated). Ties go to the smaller mtry.
std::size_t tune_mtry(const Dataset& data, const RfParams& params, std::uint64_t seed,
                      const MtryTuning& tuning = {});

namespace serial {
// Single-threaded reference for fit_forest; must produce an identical forest.
Forest fit_forest(const Dataset& data, const RfParams& params, std::uint64_t seed);
}  // namespace serial

}  // namespace nfsrd

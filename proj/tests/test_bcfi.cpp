#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "nfsrd/bcfi.hpp"
#include "nfsrd/error.hpp"
#include "nfsrd/parallel.hpp"
#include "nfsrd/synth.hpp"

namespace nfsrd {
namespace {

SyntheticData model2(std::size_t n, std::size_t p, std::uint64_t seed) {
  ModelSpec spec;
  spec.model_id = 2;
  spec.n = n;
  spec.p = p;
  spec.seed = seed;
  return gen_model(spec);
}

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

TEST(ShadowAugment, PermutesWholeRows) {
  const auto synthetic = model2(50, 3, 1);
  const Dataset& data = synthetic.data;
  Rng rng(5);
  const Dataset augmented = shadow_augment(data, rng);
  ASSERT_EQ(augmented.cols(), 6u);
  EXPECT_EQ(augmented.names()[3], "shadow_x1");
  EXPECT_EQ(augmented.names()[5], "shadow_x3");

  std::vector<std::vector<double>> original;
  std::vector<std::vector<double>> shadow;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    original.emplace_back(data.row(i).begin(), data.row(i).end());
    const auto row = augmented.row(i);
    EXPECT_TRUE(std::equal(row.begin(), row.begin() + 3, data.row(i).begin()));
    shadow.emplace_back(row.begin() + 3, row.end());
  }
  // Same multiset of rows, so column means and cross-column pairing survive.
  std::sort(original.begin(), original.end());
  std::sort(shadow.begin(), shadow.end());
  EXPECT_EQ(original, shadow);
}

TEST(RankFeatures, OrderAndTies) {
  const std::vector<double> v{0.1, 3.0, 3.0, -1.0};
  EXPECT_EQ(rank_features(v, false), (std::vector<std::size_t>{1, 2, 0, 3}));
  EXPECT_EQ(rank_features(v, true), (std::vector<std::size_t>{3, 0, 1, 2}));
}

TEST(ParseMetric, Names) {
  EXPECT_EQ(parse_metric("bcfi"), Metric::kBcfi);
  EXPECT_EQ(parse_metric("min_depth"), Metric::kMinDepth);
  EXPECT_EQ(to_string(Metric::kMinDepth), "min_depth");
  EXPECT_THROW(parse_metric("gini"), DataError);
}

TEST(DrawSubset, SortedDistinct) {
  const auto s = draw_subset(100, 30, 4);
  ASSERT_EQ(s.size(), 30u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  EXPECT_LT(s.back(), 100u);
  EXPECT_EQ(draw_subset(100, 30, 4), s);
  EXPECT_EQ(draw_subset(10, 10, 1), iota_rows(10));
}

TEST(ComputeBcfi, SingleRepetitionIsDifferenceOfImportances) {
  const auto synthetic = model2(200, 5, 2);
  const auto rows = iota_rows(200);
  RfParams params;
  params.n_trees = 20;
  const auto report = compute_bcfi(synthetic.data, rows, 1, params, 7);
  ASSERT_EQ(report.per_rep.size(), 1u);
  EXPECT_EQ(report.per_rep[0], report.bcfi);
  EXPECT_EQ(report.order.front(), 0u);
  EXPECT_EQ(report.metric, Metric::kBcfi);
}

TEST(ComputeBcfi, MeanOverRepetitions) {
  const auto synthetic = model2(150, 4, 3);
  const auto rows = iota_rows(150);
  RfParams params;
  params.n_trees = 10;
  const auto report = compute_bcfi(synthetic.data, rows, 4, params, 1);
  for (std::size_t k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (const auto& rep : report.per_rep) sum += rep[k];
    EXPECT_NEAR(report.bcfi[k], sum / 4.0, 1e-12);
  }
}

TEST(ComputeBcfi, DeterministicAcrossThreads) {
  const auto synthetic = model2(200, 6, 4);
  const auto rows = draw_subset(200, 120, 9);
  RfParams params;
  params.n_trees = 15;
  const auto a = compute_bcfi(synthetic.data, rows, 3, params, 11);
  set_num_threads(3);
  const auto b = compute_bcfi(synthetic.data, rows, 3, params, 11);
  set_num_threads(1);
  EXPECT_EQ(a.bcfi, b.bcfi);
  EXPECT_EQ(a.order, b.order);
}

TEST(ComputeBcfi, MinDepthRanksTrueFeatureFirst) {
  const auto synthetic = model2(300, 8, 5);
  const auto rows = iota_rows(300);
  RfParams params;
  params.n_trees = 30;
  const auto report = compute_bcfi(synthetic.data, rows, 2, params, 3, Metric::kMinDepth);
  EXPECT_EQ(report.metric, Metric::kMinDepth);
  EXPECT_EQ(report.order.front(), 0u);
  EXPECT_LE(report.bcfi[0], report.bcfi[1]);
}

TEST(ComputeBcfi, InvalidArguments) {
  const auto synthetic = model2(20, 3, 1);
  const std::vector<std::size_t> bad{0, 25};
  EXPECT_THROW(compute_bcfi(synthetic.data, bad, 1, RfParams{}, 1), DataError);
  const auto rows = iota_rows(20);
  EXPECT_THROW(compute_bcfi(synthetic.data, rows, 0, RfParams{}, 1), DataError);
}

}  // namespace
}  // namespace nfsrd

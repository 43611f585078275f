#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nfsrd/error.hpp"
#include "nfsrd/fsd.hpp"
#include "nfsrd/synth.hpp"

namespace nfsrd {
namespace {

TEST(Partition, SizesAndDisjointness) {
  Rng rng(1);
  const Partition part = partition_indices(100, 20, 10, 15, rng);
  EXPECT_EQ(part.a0.size(), 20u);
  EXPECT_EQ(part.a1.size(), 10u);
  EXPECT_EQ(part.a2.size(), 10u);
  EXPECT_EQ(part.a3.size(), 15u);
  EXPECT_EQ(part.a4.size(), 15u);
  EXPECT_NO_THROW(check_disjoint(part, 100));
}

TEST(Partition, ExactFitUsesEveryRow) {
  Rng rng(2);
  const Partition part = partition_indices(10, 2, 2, 2, rng);
  std::vector<std::size_t> all;
  for (const auto* s : {&part.a0, &part.a1, &part.a2, &part.a3, &part.a4}) {
    all.insert(all.end(), s->begin(), s->end());
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(all[i], i);
}

TEST(Partition, TooSmallNamesConstraint) {
  Rng rng(3);
  try {
    partition_indices(9, 2, 2, 2, rng);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("m0 + 2*m1 + 2*m2"), std::string::npos);
  }
}

TEST(Partition, OverlapDetected) {
  Partition part;
  part.a0 = {0, 1};
  part.a1 = {1};
  EXPECT_THROW(check_disjoint(part, 5), DataError);
  part.a1 = {7};
  EXPECT_THROW(check_disjoint(part, 5), DataError);
}

TEST(Residuals, ConstantAndSubset) {
  const Dataset data({1, 10, 2, 20, 3, 30}, {"a", "b"}, {5, 6, 7});
  const std::vector<std::size_t> rows{2, 0};
  const Predictor constant = [](std::span<const double>) { return 4.0; };
  EXPECT_EQ(residuals(constant, data, rows), (std::vector<double>{3.0, 1.0}));

  const std::vector<std::size_t> second{1};
  const Predictor echo = [](std::span<const double> x) {
    EXPECT_EQ(x.size(), 1u);
    return x[0];
  };
  EXPECT_EQ(residuals(echo, data, rows, std::span<const std::size_t>(second)),
            (std::vector<double>{7.0 - 30.0, 5.0 - 10.0}));
}

TEST(Residuals, MemorizingForestIsExact) {
  const Dataset data({2.0}, {"a"}, {3.5});
  RfParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  const std::vector<std::size_t> rows{0};
  EXPECT_EQ(residuals(as_predictor(fit_forest(data, params, 1)), data, rows),
            (std::vector<double>{0.0}));
}

TEST(Krr, TwoPointClosedForm) {
  const std::vector<double> xs{0.0, 1.0};
  const std::vector<double> ys{2.0, -1.0};
  const double l = 0.8;
  const double k = std::exp(-1.0 / (2.0 * l * l));
  for (double r : {0.0, 1e-3, 0.5}) {
    const KrrModel model = fit_krr(xs, ys, l, r);
    const double det = (1.0 + r) * (1.0 + r) - k * k;
    const double at0 = ((1.0 + r - k * k) * ys[0] + k * r * ys[1]) / det;
    EXPECT_NEAR(model(0.0), at0, 1e-12) << "ridge " << r;
  }
  EXPECT_NEAR(fit_krr(xs, ys, l, 0.0)(1.0), -1.0, 1e-12);
  EXPECT_NEAR(fit_krr(xs, ys, l, 1e9)(0.0), 0.0, 1e-8);
}

TEST(Krr, InvalidInputs) {
  const std::vector<double> xs{0.0, 0.0};
  const std::vector<double> ys{1.0, 2.0};
  const std::vector<double> empty;
  EXPECT_THROW(fit_krr(empty, empty, 1.0, 1e-3), DataError);
  EXPECT_THROW(fit_krr(xs, ys, 0.0, 1e-3), DataError);
  EXPECT_THROW(fit_krr(xs, ys, 1.0, -1.0), DataError);
  EXPECT_THROW(fit_krr(xs, ys, 1.0, 0.0), DataError);  // duplicated inputs, singular
}

TEST(Krr, CrossValidationIsDeterministic) {
  ModelSpec spec;
  spec.model_id = 2;
  spec.n = 120;
  spec.p = 1;
  spec.seed = 3;
  const auto synthetic = gen_model(spec);
  const auto xs = synthetic.data.column(0);
  const auto ys = synthetic.data.response();
  KrrConfig config;
  config.cross_validate = true;
  const KrrModel a = fit_krr(xs, ys, config, 5);
  const KrrModel b = fit_krr(xs, ys, config, 5);
  EXPECT_EQ(a.ridge(), b.ridge());
  EXPECT_EQ(a(4.2), b(4.2));
}

TEST(EvaluateSelection, Examples) {
  const std::vector<std::size_t> truth{0, 1};
  const std::vector<std::size_t> exact{1, 0};
  const std::vector<std::size_t> partial{0, 7, 9};
  const std::vector<std::size_t> none;
  SelectionScore s = evaluate_selection(exact, truth);
  EXPECT_DOUBLE_EQ(s.hit_fraction, 1.0);
  EXPECT_EQ(s.wrong, 0u);
  s = evaluate_selection(partial, truth);
  EXPECT_DOUBLE_EQ(s.hit_fraction, 0.5);
  EXPECT_EQ(s.wrong, 2u);
  s = evaluate_selection(none, truth);
  EXPECT_DOUBLE_EQ(s.hit_fraction, 0.0);
  EXPECT_THROW(evaluate_selection(exact, none), DataError);
}

TEST(SelectionConfig, Validation) {
  SelectionConfig config;
  EXPECT_NO_THROW(config.validate());
  config.alpha = 1.0;
  EXPECT_THROW(config.validate(), DataError);
  config = SelectionConfig{};
  config.m1 = 6;
  EXPECT_THROW(config.validate(), DataError);
  config = SelectionConfig{};
  config.n_perm = 0;
  EXPECT_THROW(config.validate(), DataError);
}

SelectionConfig small_config(std::uint64_t seed) {
  SelectionConfig config;
  config.m0 = config.m1 = config.m2 = 150;
  config.repetitions = 5;
  config.rf.n_trees = 50;
  config.n_perm = 50;
  config.kernel_train.epochs = 50;
  config.seed = seed;
  return config;
}

TEST(ForwardSelect, SequenceContract) {
  ModelSpec spec;
  spec.model_id = 1;
  spec.n = 750;
  spec.p = 6;
  spec.seed = 12;
  const auto synthetic = gen_model(spec);
  const SelectionConfig config = small_config(4);
  const PipelineResult result = select_features(synthetic.data, config);
  const SelectionResult& sel = result.selection;

  ASSERT_FALSE(sel.tests.empty());
  for (std::size_t i = 0; i < sel.tests.size(); ++i) {
    EXPECT_EQ(sel.tests[i].k, i + 1);
    if (i + 1 < sel.tests.size()) EXPECT_TRUE(sel.tests[i].test.reject);
  }
  if (sel.exhausted) {
    EXPECT_EQ(sel.tests.size(), spec.p);
    EXPECT_TRUE(sel.tests.back().test.reject);
    EXPECT_EQ(sel.selected.size(), spec.p);
  } else {
    EXPECT_FALSE(sel.tests.back().test.reject);
    EXPECT_EQ(sel.k_hat, sel.tests.size());
    EXPECT_EQ(sel.selected, std::vector<std::size_t>(sel.order.begin(), sel.order.begin() +
                                                         static_cast<std::ptrdiff_t>(sel.k_hat)));
  }
  EXPECT_EQ(sel.order, result.importance.order);

  const PipelineResult again = select_features(synthetic.data, config);
  EXPECT_EQ(again.selection.selected, sel.selected);
  EXPECT_EQ(again.selection.tests.back().test.p_value, sel.tests.back().test.p_value);
}

TEST(ForwardSelect, RejectsBadOrder) {
  ModelSpec spec;
  spec.model_id = 2;
  spec.n = 750;
  spec.p = 3;
  const auto synthetic = gen_model(spec);
  ImportanceReport report;
  report.order = {0, 0, 1};
  EXPECT_THROW(forward_select(synthetic.data, report, small_config(1)), DataError);
}

TEST(ForwardSelect, TooFewRows) {
  ModelSpec spec;
  spec.model_id = 2;
  spec.n = 700;
  spec.p = 3;
  const auto synthetic = gen_model(spec);
  EXPECT_THROW(select_features(synthetic.data, small_config(1)), DataError);
}

}  // namespace
}  // namespace nfsrd

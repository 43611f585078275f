// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
//
//   nfsrd_acceptance [criterion...]     e.g. nfsrd_acceptance 1 2 10

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "cli.hpp"
#include "nfsrd/bcfi.hpp"
#include "nfsrd/deep_mmd.hpp"
#include "nfsrd/forest.hpp"
#include "nfsrd/fsd.hpp"
#include "nfsrd/parallel.hpp"
#include "nfsrd/synth.hpp"

namespace {

using namespace nfsrd;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> normal_sample(std::size_t m, double mean, Rng& rng) {
  std::normal_distribution<double> normal(mean, 1.0);
  std::vector<double> v(m);
  for (auto& x : v) x = normal(rng);
  return v;
}

Outcome mmd_oracle() {
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng = make_rng(1000, {trial});
    const std::size_t m = 2 + trial % 19;
    const auto xs = normal_sample(m, 0.0, rng);
    const auto ys = normal_sample(m, 1.0, rng);
    TrainConfig config;
    config.seed = trial;
    const KernelParams params = init_kernel(xs, ys, config);
    const double fast = mmd2_u(params, xs, ys);
    const double slow = oracle::mmd2_u(oracle::DeepKernel{params}, xs, ys);
    worst = std::max(worst, std::abs(fast - slow) / std::abs(slow));
  }
  return {worst <= 1e-12, fmt("max relative error %.3g over 100 instances (tol 1e-12)", worst)};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t init = 0; init < 5; ++init) {
    Rng rng = make_rng(2000, {init});
    const auto xs = normal_sample(8, 0.0, rng);
    const auto ys = normal_sample(8, 1.0, rng);
    TrainConfig config;
    config.seed = init;
    const KernelParams params = init_kernel(xs, ys, config);
    worst = std::max(worst, oracle::gradient_error(params, xs, ys, config.lambda));
  }
  return {worst <= 1e-4, fmt("max relative error %.3g over 5 initializations (tol 1e-4)", worst)};
}

double rejection_rate(double shift, std::size_t trials, std::uint64_t base) {
  std::size_t rejections = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(base, {t});
    const auto xs = normal_sample(200, 0.0, rng);
    const auto ys = normal_sample(200, shift, rng);
    MmdTestConfig config;
    config.train.seed = derive_seed(base, {t, 1});
    config.n_perm = 100;
    config.alpha = 0.05;
    rejections += mmd_d_test(xs, ys, config).result.reject;
  }
  return static_cast<double>(rejections) / static_cast<double>(trials);
}

Outcome type_one() {
  const auto start = Clock::now();
  const double rate = rejection_rate(0.0, 500, 3000);
  const double minutes = std::chrono::duration<double>(Clock::now() - start).count() / 60.0;
  return {rate >= 0.03 && rate <= 0.08 && minutes <= 10.0,
          fmt("rejection rate %.3f over 500 trials (want [0.03, 0.08]), %.1f min (limit 10)", rate,
              minutes)};
}

Outcome power() {
  const double rate = rejection_rate(3.0, 100, 4000);
  return {rate >= 0.95, fmt("rejection rate %.2f over 100 trials (want >= 0.95)", rate)};
}

Outcome table_two() {
  const auto start = Clock::now();
  SelectionConfig config;
  config.m0 = config.m1 = config.m2 = 400;
  config.repetitions = 20;
  config.seed = 5000;
  std::vector<ModelSpec> specs;
  for (int id : {2, 5, 1}) {
    ModelSpec spec;
    spec.model_id = id;
    spec.p = 50;
    spec.n = 2000;
    spec.seed = 5000;
    specs.push_back(spec);
  }
  const BenchmarkTable table = run_benchmark(specs, config, 20, [](const BenchmarkRun& run) {
    std::printf("    model %d rep %zu: hits %zu/%zu wrong %zu (%.0fs)\n", run.model_id, run.rep,
                run.hits, run.useful, run.wrong, run.seconds);
    std::fflush(stdout);
  });
  const double minutes = std::chrono::duration<double>(Clock::now() - start).count() / 60.0;
  bool pass = minutes <= 90.0;
  std::string detail;
  for (const auto& s : table.summaries) {
    const bool ok = s.model_id == 1 ? (s.mu_c >= 0.90 && s.n_w <= 1.5) : (s.mu_c >= 1.0 && s.n_w <= 1.0);
    pass = pass && ok;
    detail += fmt("model %d mu_c %.2f n_w %.2f; ", s.model_id, s.mu_c, s.n_w);
  }
  return {pass, detail + fmt("%.1f min (limit 90)", minutes)};
}

Outcome snr() {
  const double table_one[] = {1.1, 2.1, 3.0, 1.1, 2.1, 2.8};
  bool pass = true;
  std::string detail;
  for (int id = 1; id <= 6; ++id) {
    ModelSpec spec;
    spec.model_id = id;
    spec.seed = 6000;
    const double value = estimate_snr(spec, 100000);
    pass = pass && std::abs(value - table_one[id - 1]) <= 0.1;
    detail += fmt("%d:%.3f ", id, value);
  }
  return {pass, detail + "(tol 0.1)"};
}

Outcome bcfi_unbiased() {
  constexpr std::size_t p = 20;
  constexpr std::size_t seeds = 50;
  std::vector<std::vector<double>> values(p);
  for (std::uint64_t s = 0; s < seeds; ++s) {
    Rng rng = make_rng(7000, {s});
    std::vector<double> x(400 * p);
    for (auto& v : x) v = draw_feature(FeatureLaw::kUniform, rng);
    const std::vector<double> y = normal_sample(400, 0.0, rng);
    const Dataset data(x, default_feature_names(p), y);
    std::vector<std::size_t> rows(400);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto report = compute_bcfi(data, rows, 20, RfParams{}, derive_seed(7000, {s, 1}));
    for (std::size_t k = 0; k < p; ++k) values[k].push_back(report.bcfi[k]);
  }
  std::size_t within = 0;
  double worst_z = 0.0;
  for (const auto& v : values) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / (n - 1.0) / n);
    const double z = std::abs(mean) / se;
    worst_z = std::max(worst_z, z);
    within += z <= 2.0;
  }
  return {within >= 18, fmt("%zu/20 features within 2 SE of 0 (want >= 18), max |z| %.2f", within, worst_z)};
}

Outcome ranking() {
  std::size_t first_bcfi = 0;
  std::size_t first_depth = 0;
  constexpr std::size_t runs = 50;
  for (std::uint64_t s = 0; s < runs; ++s) {
    ModelSpec spec;
    spec.model_id = 2;
    spec.n = 400;
    spec.p = 50;
    spec.seed = derive_seed(8000, {s});
    const auto synthetic = gen_model(spec);
    const auto rows = draw_subset(400, 400, 0);
    first_bcfi += compute_bcfi(synthetic.data, rows, 10, RfParams{}, s).order.front() == 0;
    first_depth +=
        compute_bcfi(synthetic.data, rows, 10, RfParams{}, s, Metric::kMinDepth).order.front() == 0;
  }
  const double a = static_cast<double>(first_bcfi) / runs;
  const double b = static_cast<double>(first_depth) / runs;
  return {a >= 0.95 && b >= 0.95,
          fmt("x1 ranked first: bcfi %.2f, min_depth %.2f over 50 runs (want >= 0.95)", a, b)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(NFSRD_TEST_TMP) / "acceptance_tmp";
  fs::create_directories(dir);
  const std::string csv = (dir / "data.csv").string();

  // Each command runs with 1 thread and with 4; outputs must match byte for byte.
  struct Case {
    std::string name;
    std::vector<std::string> args;
    std::string output;
  };
  const std::vector<Case> cases{
      {"gen", {"gen", "--model", "5", "--n", "900", "--p", "6", "--seed", "9", "--out", csv}, csv},
      {"importance",
       {"importance", csv, "-R", "5", "-B", "40", "--seed", "3", "--json_out",
        (dir / "imp.json").string()},
       (dir / "imp.json").string()},
      {"importance min_depth",
       {"importance", csv, "-R", "5", "-B", "40", "--seed", "3", "--metric", "min_depth",
        "--json_out", (dir / "imp_depth.json").string()},
       (dir / "imp_depth.json").string()},
      {"select",
       {"select", csv, "--m0", "150", "--m1", "150", "--m2", "150", "-R", "5", "-B", "40",
        "--n_perm", "50", "--epochs", "40", "--seed", "4", "--json_out", (dir / "sel.json").string()},
       (dir / "sel.json").string()},
      {"benchmark",
       {"benchmark", "--models", "2,1", "--p", "5", "--sizes", "100", "--reps", "2", "-R", "3",
        "-B", "30", "--n_perm", "40", "--epochs", "20", "--seed", "6", "--out",
        (dir / "bench").string()},
       (dir / "bench.json").string()},
  };

  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (int threads : {1, 4, 1}) {
      set_num_threads(threads);
      std::vector<std::string> argv{"nfsrd"};
      argv.insert(argv.end(), c.args.begin(), c.args.end());
      std::ostringstream out, err;
      const int code = cli::run(argv, out, err);
      outputs.push_back(code == 0 ? slurp(c.output) : "exit " + std::to_string(code));
    }
    set_num_threads(1);
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    pass = pass && same;
    detail += c.name + (same ? " ok; " : " DIFFERS; ");
  }
  return {pass, detail};
}

Outcome tree_oracle() {
  const Dataset data({0, 0, 1, 1}, {"x1"}, {0, 0, 10, 10});
  RfParams params;
  params.n_trees = 1;
  params.mtry = 1;
  params.min_node = 2;
  params.bootstrap = false;
  const Forest forest = fit_forest(data, params, 1);
  const Node& root = forest.trees[0].nodes[0];
  const double delta = weighted_variance_decrease(root);
  const double f1 = importance(forest)[0];
  const bool pass = root.feature == 0 && root.threshold == 0.5 && delta == 25.0 && f1 == 25.0;
  return {pass, fmt("threshold %g, delta %g, F1 %g (want 0.5, 25, 25)", root.threshold, delta, f1)};
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"mmd2_u matches brute-force oracle", mmd_oracle},
      {"objective gradient matches finite differences", gradient_check},
      {"type-I error calibrated at alpha 0.05", type_one},
      {"power against a mean shift of 3", power},
      {"desk-scale selection benchmark (models 2, 5, 1)", table_two},
      {"SNR of models 1-6", snr},
      {"BCFI unbiased on pure noise", bcfi_unbiased},
      {"true feature ranked first on model 2", ranking},
      {"byte-identical reports across runs and thread counts", determinism},
      {"hand-derived tree split", tree_oracle},
  };

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto start = Clock::now();
    const Outcome outcome = criteria[i].second();
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    failures += !outcome.pass;
    std::printf("[%s] %2d. %s: %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", id,
                criteria[i].first, outcome.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

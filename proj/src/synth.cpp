#include "nfsrd/synth.hpp"

#include <chrono>
#include <cmath>

#include "nfsrd/error.hpp"

namespace nfsrd {

void check_model_id(int model_id) {
  if (model_id < 1 || model_id > 6) {
    throw DataError("unknown model " + std::to_string(model_id) + " (expected 1..6)");
  }
}

FeatureLaw feature_law(int model_id) {
  check_model_id(model_id);
  return model_id <= 3 ? FeatureLaw::kUniform : FeatureLaw::kBeta;
}

std::vector<std::size_t> true_features(int model_id) {
  check_model_id(model_id);
  if (model_id == 2 || model_id == 5) return {0};
  return {0, 1};
}

double regression_function(int model_id, std::span<const double> x) {
  switch (model_id) {
    case 1:
    case 4:
      return 0.3 * x[0] + 0.3 * x[1];
    case 2:
    case 5:
      return 3.0 * std::sin(x[0]);
    case 3:
    case 6:
      return 5.0 * std::sin(x[0] / 10.0) * std::sqrt(x[1]);
    default:
      check_model_id(model_id);
      return 0.0;
  }
}

double draw_feature(FeatureLaw law, Rng& rng) {
  if (law == FeatureLaw::kUniform) {
    return std::uniform_real_distribution<double>(1.0, 10.0)(rng);
  }
  const double a = std::gamma_distribution<double>(2.0, 1.0)(rng);
  const double b = std::gamma_distribution<double>(4.0, 1.0)(rng);
  return 14.5 * (a / (a + b)) + 1.0;
}

SyntheticData gen_model(const ModelSpec& spec) {
  check_model_id(spec.model_id);
  const auto useful = true_features(spec.model_id);
  if (spec.n == 0) throw DataError("n must be at least 1");
  if (spec.p < useful.size()) {
    throw DataError("model " + std::to_string(spec.model_id) + " needs p >= " +
                    std::to_string(useful.size()));
  }
  const FeatureLaw law = feature_law(spec.model_id);
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<double> features(spec.n * spec.p);
  std::vector<double> response(spec.n);
  std::vector<double> base(spec.p);
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (double& v : base) v = draw_feature(law, rng);
    double* row = features.data() + i * spec.p;
    for (std::size_t k = 0; k < spec.p; ++k) {
      row[k] = (spec.correlated && k > 0) ? 0.7 * base[k] + 0.3 * base[k - 1] : base[k];
    }
    response[i] = regression_function(spec.model_id, std::span<const double>(row, spec.p)) +
                  spec.noise_sd * noise(rng);
  }
  return {Dataset(std::move(features), default_feature_names(spec.p), std::move(response)), useful};
}

double estimate_snr(const std::function<double(std::span<const double>)>& f, FeatureLaw law,
                    std::size_t n_inputs, std::size_t mc_size, std::uint64_t seed) {
  if (mc_size < 1000) throw DataError("mc_size must be at least 1000");
  Rng rng(seed);
  std::vector<double> x(n_inputs);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < mc_size; ++i) {
    for (double& v : x) v = draw_feature(law, rng);
    const double value = f(x);
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  return std::sqrt(m2 / static_cast<double>(mc_size - 1));
}

double estimate_snr(const ModelSpec& spec, std::size_t mc_size) {
  check_model_id(spec.model_id);
  const int id = spec.model_id;
  return estimate_snr([id](std::span<const double> x) { return regression_function(id, x); },
                      feature_law(id), 2, mc_size, spec.seed);
}

BenchmarkSummary summarize_runs(int model_id, std::span<const BenchmarkRun> runs) {
  BenchmarkSummary summary;
  summary.model_id = model_id;
  std::size_t hits = 0;
  std::size_t useful = 0;
  std::size_t wrong = 0;
  double seconds = 0.0;
  for (const auto& run : runs) {
    if (run.model_id != model_id) continue;
    ++summary.reps;
    hits += run.hits;
    useful += run.useful;
    wrong += run.wrong;
    seconds += run.seconds;
  }
  if (summary.reps == 0) return summary;
  const double reps = static_cast<double>(summary.reps);
  summary.mu_c = static_cast<double>(hits) / static_cast<double>(useful);
  summary.n_w = static_cast<double>(wrong) / reps;
  summary.mean_seconds = seconds / reps;
  return summary;
}

BenchmarkTable run_benchmark(std::span<const ModelSpec> models, const SelectionConfig& config,
                             std::size_t reps, const BenchmarkProgress& progress) {
  if (reps == 0) throw DataError("reps must be at least 1");
  config.validate();
  for (const auto& spec : models) check_model_id(spec.model_id);

  BenchmarkTable table;
  for (const auto& spec : models) {
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      ModelSpec rep_spec = spec;
      const auto model = static_cast<std::uint64_t>(spec.model_id);
      rep_spec.seed = derive_seed(spec.seed, {stream::kBenchmarkRep, model, rep});
      const SyntheticData synthetic = gen_model(rep_spec);

      SelectionConfig rep_config = config;
      rep_config.seed = derive_seed(config.seed, {stream::kBenchmarkRep, model, rep});
      const PipelineResult result = select_features(synthetic.data, rep_config);
      const SelectionScore score = evaluate_selection(result.selection.selected, synthetic.true_features);

      BenchmarkRun run;
      run.model_id = spec.model_id;
      run.rep = rep;
      run.useful = synthetic.true_features.size();
      run.hits = static_cast<std::size_t>(std::lround(score.hit_fraction * static_cast<double>(run.useful)));
      run.wrong = score.wrong;
      run.selected = result.selection.selected;
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (progress) progress(run);
      table.runs.push_back(std::move(run));
    }
    table.summaries.push_back(summarize_runs(spec.model_id, table.runs));
  }
  return table;
}

}  // namespace nfsrd

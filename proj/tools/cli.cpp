#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "nfsrd/bcfi.hpp"
#include "nfsrd/csv.hpp"
#include "nfsrd/error.hpp"
#include "nfsrd/fsd.hpp"
#include "nfsrd/parallel.hpp"
#include "nfsrd/synth.hpp"
#include "report.hpp"

namespace nfsrd::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write '" + path + "'");
  file << text;
  if (!file) throw DataError("failed writing '" + path + "'");
}

struct GenOptions {
  int model = 2;
  std::size_t n = 1000;
  std::size_t p = 10;
  bool correlated = false;
  std::uint64_t seed = 0;
  std::string out;
};

struct ImportanceOptions {
  std::string csv;
  std::string target = "target";
  std::size_t m0 = 400;
  std::size_t repetitions = 100;
  std::size_t trees = 100;
  std::uint64_t seed = 0;
  std::string metric = "bcfi";
  std::string json_out;
  bool timings = false;
};

struct SelectOptions {
  std::string csv;
  std::string target = "target";
  double alpha = 0.05;
  std::size_t m0 = 400;
  std::size_t m1 = 400;
  std::size_t m2 = 400;
  std::size_t repetitions = 100;
  std::size_t trees = 100;
  std::size_t n_perm = 100;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  std::string metric = "bcfi";
  std::string json_out;
  bool no_krr = false;
  bool krr_cv = false;
  bool bonferroni = false;
  bool no_tune_mtry = false;
  bool timings = false;
};

struct BenchmarkOptions {
  std::vector<int> models{2, 5, 1};
  std::size_t p = 50;
  std::size_t sizes = 400;
  std::size_t n = 0;
  std::size_t reps = 20;
  std::size_t repetitions = 100;
  std::size_t trees = 100;
  std::size_t n_perm = 100;
  std::size_t epochs = 200;
  bool correlated = false;
  std::uint64_t seed = 0;
  std::string out;
  bool no_tune_mtry = false;
  bool timings = false;
};

int cmd_gen(const GenOptions& opt, std::ostream& out) {
  ModelSpec spec;
  spec.model_id = opt.model;
  spec.n = opt.n;
  spec.p = opt.p;
  spec.correlated = opt.correlated;
  spec.seed = opt.seed;
  const SyntheticData synthetic = gen_model(spec);
  std::ostringstream text;
  write_csv(text, synthetic.data);
  write_text(opt.out, text.str());
  out << "wrote " << synthetic.data.rows() << " rows x " << synthetic.data.cols()
      << " features (model " << opt.model << ") to " << opt.out << '\n';
  return kExitOk;
}

void print_ranking(std::ostream& out, const ImportanceReport& report, const Dataset& data) {
  out << "rank  feature              " << (report.metric == Metric::kBcfi ? "bcfi" : "min_depth") << '\n';
  for (std::size_t rank = 0; rank < report.order.size(); ++rank) {
    const std::size_t k = report.order[rank];
    out << std::setw(4) << rank + 1 << "  " << std::left << std::setw(20) << data.names()[k]
        << std::right << ' ' << std::setprecision(6) << report.bcfi[k] << '\n';
  }
}

int cmd_importance(const ImportanceOptions& opt, bool m0_given, std::ostream& out) {
  const auto start = Clock::now();
  const Dataset data = read_csv_file(opt.csv, opt.target);
  const Metric metric = parse_metric(opt.metric);
  const std::size_t m0 = m0_given ? opt.m0 : std::min(opt.m0, data.rows());
  RfParams rf;
  rf.n_trees = opt.trees;
  const auto load_seconds = seconds_since(start);

  const auto t0 = Clock::now();
  const std::vector<std::size_t> subset = draw_subset(data.rows(), m0, opt.seed);
  const ImportanceReport report = compute_bcfi(data, subset, opt.repetitions, rf,
                                               derive_seed(opt.seed, {stream::kBcfiRepetition}), metric);
  const auto importance_seconds = seconds_since(t0);

  print_ranking(out, report, data);
  if (!opt.json_out.empty()) {
    Json j;
    j["command"] = "importance";
    j["config"] = {{"csv", opt.csv}, {"target", opt.target}, {"m0", m0},
                   {"R", opt.repetitions}, {"rf", rf_params_json(rf)}, {"seed", opt.seed},
                   {"metric", to_string(metric)}};
    j["importance"] = importance_json(report, data.names());
    if (opt.timings) j["timings"] = {{"load", load_seconds}, {"importance", importance_seconds}};
    write_text(opt.json_out, render(j));
  }
  return kExitOk;
}

int cmd_select(const SelectOptions& opt, std::ostream& out) {
  const auto start = Clock::now();
  const Dataset data = read_csv_file(opt.csv, opt.target);
  const auto load_seconds = seconds_since(start);

  SelectionConfig config;
  config.m0 = opt.m0;
  config.m1 = opt.m1;
  config.m2 = opt.m2;
  config.alpha = opt.alpha;
  config.repetitions = opt.repetitions;
  config.rf.n_trees = opt.trees;
  config.n_perm = opt.n_perm;
  config.kernel_train.epochs = opt.epochs;
  config.metric = parse_metric(opt.metric);
  config.seed = opt.seed;
  config.krr_first_step = !opt.no_krr;
  config.krr.cross_validate = opt.krr_cv;
  config.bonferroni = opt.bonferroni;
  config.tune_mtry = !opt.no_tune_mtry;
  config.validate();
  // Surface infeasible sizes before any training starts.
  partition_for(data.rows(), config);

  const PipelineResult result = select_features(data, config);
  const auto& sel = result.selection;

  out << "tested prefixes:\n";
  for (const auto& step : sel.tests) {
    out << "  K=" << step.k << " (+" << data.names()[sel.order[step.k - 1]] << ")  stat="
        << std::setprecision(6) << step.test.statistic << "  p=" << step.test.p_value
        << (step.test.reject ? "  rejected" : "  not rejected") << '\n';
  }
  out << "selected " << sel.k_hat << " feature(s):";
  for (std::size_t k : sel.selected) out << ' ' << data.names()[k];
  out << (sel.exhausted ? "  [every test rejected]" : "") << '\n';

  if (!opt.json_out.empty()) {
    Json j;
    j["command"] = "select";
    Json cfg = selection_config_json(config);
    cfg["csv"] = opt.csv;
    cfg["target"] = opt.target;
    j["config"] = std::move(cfg);
    j["importance"] = importance_json(result.importance, data.names());
    j["selection"] = selection_json(sel, data.names());
    if (opt.timings) {
      j["timings"] = {{"load", load_seconds},
                      {"importance", result.importance_seconds},
                      {"selection", result.selection_seconds}};
    }
    write_text(opt.json_out, render(j));
  }
  return kExitOk;
}

int cmd_benchmark(const BenchmarkOptions& opt, std::ostream& out) {
  if (opt.reps == 0) throw DataError("reps must be at least 1");
  SelectionConfig config;
  config.m0 = config.m1 = config.m2 = opt.sizes;
  config.repetitions = opt.repetitions;
  config.rf.n_trees = opt.trees;
  config.n_perm = opt.n_perm;
  config.kernel_train.epochs = opt.epochs;
  config.seed = opt.seed;
  config.tune_mtry = !opt.no_tune_mtry;
  config.validate();

  std::vector<ModelSpec> specs;
  for (int id : opt.models) {
    ModelSpec spec;
    spec.model_id = id;
    spec.p = opt.p;
    spec.n = opt.n > 0 ? opt.n : config.m0 + 2 * config.m1 + 2 * config.m2;
    spec.correlated = opt.correlated;
    spec.seed = opt.seed;
    check_model_id(id);
    specs.push_back(spec);
  }

  const BenchmarkTable table = run_benchmark(specs, config, opt.reps, [&](const BenchmarkRun& run) {
    out << "model " << run.model_id << " rep " << run.rep << ": hits " << run.hits << '/'
        << run.useful << ", wrong " << run.wrong << ", " << std::fixed << std::setprecision(1)
        << run.seconds << "s" << std::defaultfloat << '\n';
  });

  out << "model  reps  mu_c   n_w    mean_s\n";
  for (const auto& s : table.summaries) {
    out << std::setw(5) << s.model_id << std::setw(6) << s.reps << "  " << std::fixed
        << std::setprecision(2) << s.mu_c << "  " << s.n_w << "  " << std::setprecision(1)
        << s.mean_seconds << std::defaultfloat << '\n';
  }

  if (!opt.out.empty()) {
    std::ostringstream csv;
    write_benchmark_csv(csv, table);
    write_text(opt.out + ".csv", csv.str());
    Json j;
    j["command"] = "benchmark";
    Json cfg = selection_config_json(config);
    cfg["models"] = opt.models;
    cfg["p"] = opt.p;
    cfg["n"] = specs.empty() ? 0 : specs.front().n;
    cfg["reps"] = opt.reps;
    cfg["correlated"] = opt.correlated;
    j["config"] = std::move(cfg);
    j["benchmark"] = benchmark_json(table, opt.timings);
    write_text(opt.out + ".json", render(j));
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feature selection with shadow-debiased forest importance and deep-kernel MMD tests"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset as CSV");
  gen_cmd->add_option("--model", gen.model, "Model id 1..6")->required();
  gen_cmd->add_option("--n", gen.n, "Number of rows");
  gen_cmd->add_option("--p", gen.p, "Number of features");
  gen_cmd->add_flag("--correlated", gen.correlated, "Use the correlated feature variant");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  ImportanceOptions imp;
  auto* imp_cmd = app.add_subcommand("importance", "Rank features by debiased importance");
  imp_cmd->add_option("csv", imp.csv, "Input CSV")->required();
  imp_cmd->add_option("--target", imp.target, "Response column name");
  auto* imp_m0 = imp_cmd->add_option("--m0", imp.m0, "Subsample size (default min(400, n))");
  imp_cmd->add_option("-R,--R", imp.repetitions, "Shadow repetitions");
  imp_cmd->add_option("-B,--B", imp.trees, "Trees per forest");
  imp_cmd->add_option("--seed", imp.seed, "Random seed");
  imp_cmd->add_option("--metric", imp.metric, "bcfi or min_depth");
  imp_cmd->add_option("--json,--json_out,--json-out", imp.json_out, "Write a JSON report here");
  imp_cmd->add_flag("--timings", imp.timings, "Include wall-clock timings in the JSON report");

  SelectOptions sel;
  auto* sel_cmd = app.add_subcommand("select", "Select features by sequential MMD-D tests");
  sel_cmd->add_option("csv", sel.csv, "Input CSV")->required();
  sel_cmd->add_option("--target", sel.target, "Response column name");
  sel_cmd->add_option("--alpha", sel.alpha, "Significance level");
  sel_cmd->add_option("--m0", sel.m0, "Importance subsample size");
  sel_cmd->add_option("--m1", sel.m1, "Residual sample size");
  sel_cmd->add_option("--m2", sel.m2, "Model training sample size");
  sel_cmd->add_option("-R,--R", sel.repetitions, "Shadow repetitions");
  sel_cmd->add_option("-B,--B", sel.trees, "Trees per forest");
  sel_cmd->add_option("--n_perm,--n-perm", sel.n_perm, "Permutations per test");
  sel_cmd->add_option("--epochs", sel.epochs, "Kernel training epochs");
  sel_cmd->add_option("--seed", sel.seed, "Random seed");
  sel_cmd->add_option("--metric", sel.metric, "bcfi or min_depth");
  sel_cmd->add_option("--json_out,--json-out,--json", sel.json_out, "Write a JSON report here");
  sel_cmd->add_flag("--no-krr", sel.no_krr, "Use a forest instead of KRR for K = 1");
  sel_cmd->add_flag("--krr-cv", sel.krr_cv, "Choose the KRR ridge by 5-fold cross-validation");
  sel_cmd->add_flag("--bonferroni", sel.bonferroni, "Test each step at alpha / p");
  sel_cmd->add_flag("--no-tune-mtry", sel.no_tune_mtry,
                    "Use the default mtry instead of cross-validating it for the selection forests");
  sel_cmd->add_flag("--timings", sel.timings, "Include wall-clock timings in the JSON report");

  BenchmarkOptions bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run the synthetic selection benchmark");
  bench_cmd->add_option("--models", bench.models, "Model ids")->delimiter(',');
  bench_cmd->add_option("--p", bench.p, "Number of features");
  bench_cmd->add_option("--sizes", bench.sizes, "m0 = m1 = m2");
  bench_cmd->add_option("--n", bench.n, "Rows per dataset (default m0 + 2 m1 + 2 m2)");
  bench_cmd->add_option("--reps", bench.reps, "Monte Carlo repetitions per model");
  bench_cmd->add_option("-R,--R", bench.repetitions, "Shadow repetitions");
  bench_cmd->add_option("-B,--B", bench.trees, "Trees per forest");
  bench_cmd->add_option("--n_perm,--n-perm", bench.n_perm, "Permutations per test");
  bench_cmd->add_option("--epochs", bench.epochs, "Kernel training epochs");
  bench_cmd->add_flag("--correlated", bench.correlated, "Use the correlated feature variant");
  bench_cmd->add_option("--seed", bench.seed, "Random seed");
  bench_cmd->add_flag("--no-tune-mtry", bench.no_tune_mtry,
                      "Use the default mtry instead of cross-validating it for the selection forests");
  bench_cmd->add_option("--out", bench.out, "Output prefix for <out>.csv and <out>.json");
  bench_cmd->add_flag("--timings", bench.timings, "Include mean runtimes in the JSON summary");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*imp_cmd) return cmd_importance(imp, imp_m0->count() > 0, out);
    if (*sel_cmd) return cmd_select(sel, out);
    if (*bench_cmd) return cmd_benchmark(bench, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace nfsrd::cli

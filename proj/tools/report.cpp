#include "report.hpp"

#include <charconv>
#include <ostream>

namespace nfsrd::cli {

Json rf_params_json(const RfParams& params) {
  Json j;
  j["n_trees"] = params.n_trees;
  j["mtry"] = params.mtry ? Json(*params.mtry) : Json("auto");
  j["min_node"] = params.min_node;
  j["max_depth"] = params.max_depth ? Json(*params.max_depth) : Json(nullptr);
  j["bootstrap"] = params.bootstrap;
  return j;
}

Json selection_config_json(const SelectionConfig& config) {
  Json j;
  j["m0"] = config.m0;
  j["m1"] = config.m1;
  j["m2"] = config.m2;
  j["alpha"] = config.alpha;
  j["R"] = config.repetitions;
  j["rf"] = rf_params_json(config.rf);
  j["n_perm"] = config.n_perm;
  j["metric"] = to_string(config.metric);
  j["seed"] = config.seed;
  j["krr_first_step"] = config.krr_first_step;
  j["krr_ridge"] = config.krr.ridge;
  j["krr_cross_validate"] = config.krr.cross_validate;
  j["bonferroni"] = config.bonferroni;
  j["tune_mtry"] = config.tune_mtry;
  j["kernel"] = {{"epochs", config.kernel_train.epochs},
                 {"learning_rate", config.kernel_train.learning_rate},
                 {"lambda", config.kernel_train.lambda},
                 {"initial_mixing", config.kernel_train.initial_mixing},
                 {"train_mixing", config.kernel_train.train_mixing}};
  return j;
}

Json importance_json(const ImportanceReport& report, const std::vector<std::string>& names) {
  Json j;
  j["metric"] = to_string(report.metric);
  j["features"] = names;
  j["values"] = report.bcfi;
  j["order"] = report.order;
  Json ranked = Json::array();
  for (std::size_t rank = 0; rank < report.order.size(); ++rank) {
    const std::size_t k = report.order[rank];
    ranked.push_back({{"rank", rank + 1}, {"feature", names[k]}, {"value", report.bcfi[k]}});
  }
  j["ranked"] = std::move(ranked);
  j["per_rep"] = report.per_rep;
  return j;
}

Json selection_json(const SelectionResult& result, const std::vector<std::string>& names) {
  Json j;
  Json tests = Json::array();
  for (const auto& step : result.tests) {
    tests.push_back({{"k", step.k},
                     {"feature", names[result.order[step.k - 1]]},
                     {"statistic", step.test.statistic},
                     {"threshold", step.test.threshold},
                     {"p_value", step.test.p_value},
                     {"reject", step.test.reject}});
  }
  j["tests"] = std::move(tests);
  j["k_hat"] = result.k_hat;
  j["exhausted"] = result.exhausted;
  std::vector<std::string> selected;
  for (std::size_t k : result.selected) selected.push_back(names[k]);
  j["selected"] = selected;
  j["selected_indices"] = result.selected;
  return j;
}

Json benchmark_json(const BenchmarkTable& table, bool with_timings) {
  Json summaries = Json::array();
  for (const auto& s : table.summaries) {
    Json row{{"model_id", s.model_id}, {"reps", s.reps}, {"mu_c", s.mu_c}, {"n_w", s.n_w}};
    if (with_timings) row["mean_seconds"] = s.mean_seconds;
    summaries.push_back(std::move(row));
  }
  Json runs = Json::array();
  for (const auto& r : table.runs) {
    runs.push_back({{"model_id", r.model_id},
                    {"rep", r.rep},
                    {"hits", r.hits},
                    {"wrong", r.wrong},
                    {"selected_indices", r.selected}});
  }
  return {{"summaries", std::move(summaries)}, {"runs", std::move(runs)}};
}

void write_benchmark_csv(std::ostream& out, const BenchmarkTable& table) {
  out << "model_id,rep,hits,wrong,seconds\n";
  char buffer[64];
  for (const auto& r : table.runs) {
    const auto res = std::to_chars(buffer, buffer + sizeof(buffer), r.seconds);
    out << r.model_id << ',' << r.rep << ',' << r.hits << ',' << r.wrong << ','
        << std::string_view(buffer, static_cast<std::size_t>(res.ptr - buffer)) << '\n';
  }
}

std::string render(const Json& report) { return report.dump(2) + "\n"; }

}  // namespace nfsrd::cli

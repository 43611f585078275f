#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nfsrd/bcfi.hpp"
#include "nfsrd/fsd.hpp"
#include "nfsrd/synth.hpp"

namespace nfsrd::cli {

using Json = nlohmann::json;

Json rf_params_json(const RfParams& params);
Json selection_config_json(const SelectionConfig& config);

Json importance_json(const ImportanceReport& report, const std::vector<std::string>& names);
Json selection_json(const SelectionResult& result, const std::vector<std::string>& names);

Json benchmark_json(const BenchmarkTable& table, bool with_timings);
void write_benchmark_csv(std::ostream& out, const BenchmarkTable& table);

// Two-space indented dump with a trailing newline; parsing the output and
// dumping again yields the same bytes.
std::string render(const Json& report);

}  // namespace nfsrd::cli

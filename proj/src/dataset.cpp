#include "nfsrd/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "nfsrd/error.hpp"

namespace nfsrd {

Dataset::Dataset(std::vector<double> features, std::vector<std::string> names,
                 std::vector<double> response)
    : features_(std::move(features)), names_(std::move(names)), response_(std::move(response)) {
  if (response_.empty()) throw DataError("dataset needs at least one row");
  if (names_.empty()) throw DataError("dataset needs at least one feature");
  if (features_.size() != rows() * cols()) {
    throw DataError("feature matrix has " + std::to_string(features_.size()) +
                    " values, expected " + std::to_string(rows() * cols()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) throw DataError("duplicate feature name '" + name + "'");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!std::isfinite(features_[i])) {
      throw DataError("non-finite feature value at row " + std::to_string(i / cols()) +
                      ", column " + std::to_string(i % cols()));
    }
  }
  for (std::size_t i = 0; i < response_.size(); ++i) {
    if (!std::isfinite(response_[i])) {
      throw DataError("non-finite response at row " + std::to_string(i));
    }
  }
}

std::vector<double> Dataset::column(std::size_t col) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, col);
  return out;
}

Dataset Dataset::subset_rows(std::span<const std::size_t> rows_in) const {
  std::vector<double> features;
  features.reserve(rows_in.size() * cols());
  std::vector<double> response;
  response.reserve(rows_in.size());
  for (std::size_t r : rows_in) {
    if (r >= rows()) throw DataError("row index out of range");
    const auto src = row(r);
    features.insert(features.end(), src.begin(), src.end());
    response.push_back(response_[r]);
  }
  return Dataset(std::move(features), names_, std::move(response));
}

Dataset Dataset::select_columns(std::span<const std::size_t> cols_in) const {
  std::vector<std::string> names;
  names.reserve(cols_in.size());
  for (std::size_t c : cols_in) {
    if (c >= cols()) throw DataError("column index out of range");
    names.push_back(names_[c]);
  }
  std::vector<double> features;
  features.reserve(rows() * cols_in.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t c : cols_in) features.push_back(at(i, c));
  }
  return Dataset(std::move(features), std::move(names), response_);
}

std::vector<std::string> default_feature_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t k = 1; k <= p; ++k) names.push_back("x" + std::to_string(k));
  return names;
}

}  // namespace nfsrd
